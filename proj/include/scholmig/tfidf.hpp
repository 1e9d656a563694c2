#pragma once

// Bag-of-words features over affiliation text. Tokens come from the combined
// institution/city/address strings; idf uses the smoothed form
// ln((1 + N) / (1 + df)) + 1 so every retained token has positive weight.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "scholmig/errors.hpp"
#include "scholmig/record.hpp"
#include "scholmig/text.hpp"

namespace scholmig {

struct SparseVec {
  // (feature index, value), strictly increasing by index.
  std::vector<std::pair<int, double>> entries;

  bool empty() const { return entries.empty(); }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& [i, v] : entries) s += v * v;
    return s;
  }
};

struct TfidfVocabulary {
  std::vector<std::string> tokens;              // index -> token
  std::unordered_map<std::string, int> index;   // token -> index
  std::vector<double> idf;                      // index -> weight
  std::int64_t document_count = 0;

  std::size_t size() const { return tokens.size(); }

  bool operator==(const TfidfVocabulary& other) const {
    return tokens == other.tokens && idf == other.idf &&
           document_count == other.document_count;
  }
};

inline std::vector<std::string> affiliation_tokens(const Affiliation& a) {
  return text::tokenize(a.text());
}

// Vocabulary over the distinct tokens of each affiliation document, dropping
// tokens seen in fewer than min_df documents. Token indices are assigned in
// lexicographic order.
inline TfidfVocabulary build_vocabulary(const std::vector<Affiliation>& affiliations,
                                        int min_df = 2) {
  if (affiliations.empty()) throw DataError("cannot build a vocabulary from no affiliations");
  if (min_df < 1) throw DataError("min_df must be >= 1");

  std::map<std::string, std::int64_t> df;
  for (const auto& a : affiliations) {
    std::unordered_set<std::string> seen;
    for (auto& tok : affiliation_tokens(a)) seen.insert(std::move(tok));
    for (const auto& tok : seen) ++df[tok];
  }

  TfidfVocabulary vocab;
  vocab.document_count = static_cast<std::int64_t>(affiliations.size());
  for (const auto& [tok, count] : df) {
    if (count < min_df) continue;
    const int idx = static_cast<int>(vocab.tokens.size());
    vocab.index.emplace(tok, idx);
    vocab.tokens.push_back(tok);
    vocab.idf.push_back(std::log((1.0 + static_cast<double>(vocab.document_count)) /
                                 (1.0 + static_cast<double>(count))) +
                        1.0);
  }
  return vocab;
}

// tf x idf, L2 normalized. Out-of-vocabulary tokens are ignored; an
// affiliation with no in-vocabulary token yields the zero vector.
inline SparseVec vectorize(const Affiliation& affiliation, const TfidfVocabulary& vocab) {
  std::map<int, double> tf;
  for (const auto& tok : affiliation_tokens(affiliation)) {
    const auto it = vocab.index.find(tok);
    if (it != vocab.index.end()) tf[it->second] += 1.0;
  }
  SparseVec v;
  v.entries.reserve(tf.size());
  double norm_sq = 0.0;
  for (const auto& [idx, count] : tf) {
    const double w = count * vocab.idf[static_cast<std::size_t>(idx)];
    v.entries.emplace_back(idx, w);
    norm_sq += w * w;
  }
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& [idx, w] : v.entries) w *= inv;
  }
  return v;
}

}  // namespace scholmig
