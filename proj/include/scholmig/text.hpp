#pragma once

// Text utilities shared by the ingestion, disambiguation, gender, and topic
// modules: UTF-8 aware lowercasing with Latin diacritic folding, tokenization
// on non-alphanumeric boundaries, edit-distance name similarity, a small
// English stop-word list, and a deterministic suffix-stripping stemmer.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace scholmig::text {

// Decodes one UTF-8 code point starting at i and advances i. Malformed bytes
// decode to U+FFFD one byte at a time.
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + static_cast<std::size_t>(extra) >= s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    const unsigned char bk = byte(i + static_cast<std::size_t>(k));
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += static_cast<std::size_t>(extra) + 1;
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// ASCII replacement for Latin-1 Supplement and Latin Extended-A letters;
// nullptr when the code point is not covered by the folding table.
inline const char* latin_fold(char32_t cp) {
  if (cp >= 0x00C0 && cp <= 0x00FF) {
    switch (cp) {
      case 0x00C6: case 0x00E6: return "ae";
      case 0x00D0: case 0x00F0: return "d";
      case 0x00D7: case 0x00F7: return nullptr;  // multiplication/division signs
      case 0x00D8: case 0x00F8: return "o";
      case 0x00DE: case 0x00FE: return "th";
      case 0x00DF: return "ss";
      default: break;
    }
    const char32_t base = (cp >= 0x00E0) ? cp - 0x20 : cp;  // upper-case row
    if (base >= 0x00C0 && base <= 0x00C5) return "a";
    if (base == 0x00C7) return "c";
    if (base >= 0x00C8 && base <= 0x00CB) return "e";
    if (base >= 0x00CC && base <= 0x00CF) return "i";
    if (base == 0x00D1) return "n";
    if (base >= 0x00D2 && base <= 0x00D6) return "o";
    if (base >= 0x00D9 && base <= 0x00DC) return "u";
    if (base == 0x00DD) return "y";
    if (cp == 0x00FF) return "y";
    return nullptr;
  }
  if (cp >= 0x0100 && cp <= 0x017F) {
    if (cp <= 0x0105) return "a";
    if (cp <= 0x010D) return "c";
    if (cp <= 0x0111) return "d";
    if (cp <= 0x011B) return "e";
    if (cp <= 0x0123) return "g";
    if (cp <= 0x0127) return "h";
    if (cp <= 0x0131) return "i";
    if (cp <= 0x0133) return "ij";
    if (cp <= 0x0135) return "j";
    if (cp <= 0x0138) return "k";
    if (cp <= 0x0142) return "l";
    if (cp <= 0x014B) return "n";
    if (cp <= 0x0151) return "o";
    if (cp <= 0x0153) return "oe";
    if (cp <= 0x0159) return "r";
    if (cp <= 0x0161) return "s";
    if (cp <= 0x0167) return "t";
    if (cp <= 0x0173) return "u";
    if (cp <= 0x0175) return "w";
    if (cp <= 0x0178) return "y";
    if (cp <= 0x017E) return "z";
    return "s";  // long s
  }
  return nullptr;
}

// Lowercases ASCII, folds Latin diacritics to ASCII, and passes other code
// points through unchanged.
inline std::string fold_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const char32_t cp = decode_utf8(s, i);
    if (cp < 0x80) {
      char c = static_cast<char>(cp);
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      out.push_back(c);
      continue;
    }
    if (const char* rep = latin_fold(cp)) {
      out += rep;
    } else {
      append_utf8(out, cp);
    }
  }
  return out;
}

// A code point that belongs inside a token: ASCII alphanumerics, folded Latin
// letters, and any other non-ASCII letterish code point.
inline bool is_word_cp(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  if (cp == 0x00D7 || cp == 0x00F7) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
  return true;
}

// Lowercased, diacritic-folded tokens split on non-alphanumeric boundaries.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < s.size()) {
    const char32_t cp = decode_utf8(s, i);
    if (is_word_cp(cp)) {
      if (cp < 0x80) {
        char c = static_cast<char>(cp);
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        current.push_back(c);
      } else if (const char* rep = latin_fold(cp)) {
        current += rep;
      } else {
        append_utf8(current, cp);
      }
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Normalized edit similarity on folded, lowercased strings: 1 identical,
// 0 maximally different. Two empty strings compare as identical.
inline double name_similarity(std::string_view a, std::string_view b) {
  const std::string fa = fold_lower(a);
  const std::string fb = fold_lower(b);
  const std::size_t longest = std::max(fa.size(), fb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(fa, fb)) / static_cast<double>(longest);
}

inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "also", "am", "an",
      "and", "any", "are", "as", "at", "based", "be", "because", "been", "before",
      "being", "below", "between", "both", "but", "by", "can", "cannot", "could",
      "did", "do", "does", "doing", "down", "during", "each", "et", "few", "for",
      "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
      "him", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself",
      "more", "most", "my", "new", "no", "nor", "not", "of", "off", "on", "once",
      "only", "or", "other", "our", "ours", "out", "over", "own", "per", "same",
      "she", "should", "so", "some", "such", "than", "that", "the", "their",
      "theirs", "them", "then", "there", "these", "they", "this", "those",
      "through", "to", "too", "under", "until", "up", "upon", "us", "use", "used",
      "using", "very", "via", "was", "we", "were", "what", "when", "where",
      "which", "while", "who", "whom", "why", "will", "with", "within", "without",
      "would", "you", "your", "yours",
  };
  return words;
}

namespace detail {

inline bool has_vowel(std::string_view s) {
  for (char c : s) {
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y') return true;
  }
  return false;
}

inline bool is_consonant(char c) {
  return c >= 'a' && c <= 'z' && c != 'a' && c != 'e' && c != 'i' && c != 'o' && c != 'u';
}

inline void undouble(std::string& s) {
  const std::size_t n = s.size();
  if (n < 2) return;
  const char c = s[n - 1];
  if (c == s[n - 2] && is_consonant(c) && c != 'l' && c != 's' && c != 'z') s.pop_back();
}

}  // namespace detail

// Deterministic suffix stripper in the Porter tradition: plural forms, -ing,
// -ed, -ly, and a silent final e, plus a short irregular list. Input must
// already be lowercase.
inline std::string stem(std::string token) {
  static const std::unordered_map<std::string, std::string> irregular = {
      {"data", "datum"},   {"criteria", "criterion"}, {"media", "medium"},
      {"children", "child"}, {"analyses", "analysis"},
  };
  if (const auto it = irregular.find(token); it != irregular.end()) return it->second;

  const auto ends = [&](std::string_view suffix) {
    return token.size() >= suffix.size() &&
           std::string_view(token).substr(token.size() - suffix.size()) == suffix;
  };

  if (ends("sses")) {
    token.erase(token.size() - 2);
  } else if (ends("ies") && token.size() > 4) {
    token.erase(token.size() - 2);
  } else if (ends("ss")) {
    // keep
  } else if (ends("s") && token.size() >= 4) {
    token.pop_back();
  }

  if (ends("ing") && token.size() >= 5) {
    std::string candidate = token.substr(0, token.size() - 3);
    if (detail::has_vowel(candidate) && candidate.size() >= 2) {
      detail::undouble(candidate);
      token = candidate;
    }
  } else if (ends("ed") && token.size() >= 4) {
    std::string candidate = token.substr(0, token.size() - 2);
    if (detail::has_vowel(candidate) && candidate.size() >= 2) {
      detail::undouble(candidate);
      token = candidate;
    }
  }

  if (ends("ly") && token.size() >= 5) token.erase(token.size() - 2);
  if (ends("e") && token.size() >= 5) token.pop_back();
  return token;
}

}  // namespace scholmig::text
