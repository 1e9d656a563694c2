#pragma once

// Gender inference from first names against an offline name->gender frequency
// table. Names are normalized (first resolvable given name, lowercased,
// diacritics folded, initials dropped); manual overrides take precedence over
// table hits; everything else is labeled unknown and stays out of
// gender-disaggregated aggregates downstream.

#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scholmig/csv.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/record.hpp"
#include "scholmig/text.hpp"

namespace scholmig {

inline constexpr const char* kFemale = "female";
inline constexpr const char* kMale = "male";
inline constexpr const char* kUnknownGender = "unknown";

// The first given-name token of a full name, lowercased with diacritics
// folded. Handles both "First M. Last" and "Last, First M." shapes; initials
// are skipped. A name with no resolvable given name (initials only, a bare
// surname, or empty) normalizes to the empty string.
inline std::string normalize_first_name(std::string_view full_name) {
  const std::string folded = text::fold_lower(full_name);

  std::string given_part;
  const std::size_t comma = folded.find(',');
  if (comma != std::string::npos) {
    given_part = folded.substr(comma + 1);
  } else {
    given_part = folded;
  }

  // Split on whitespace, keeping letters and hyphens inside tokens.
  std::vector<std::string> tokens;
  std::string current;
  for (char c : given_part) {
    const bool keep = (c >= 'a' && c <= 'z') || c == '-' ||
                      static_cast<unsigned char>(c) >= 0x80;
    if (keep) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(current);

  // Without a comma the last token is the surname, not a given name.
  std::size_t limit = tokens.size();
  if (comma == std::string::npos) {
    if (tokens.size() < 2) return {};
    limit = tokens.size() - 1;
  }
  for (std::size_t i = 0; i < limit; ++i) {
    if (tokens[i].size() >= 2) return tokens[i];
  }
  return {};
}

struct NameGenderTable {
  // normalized first name -> (majority label, probability in [0.5, 1])
  std::unordered_map<std::string, std::pair<std::string, double>> entries;

  static NameGenderTable from_csv(std::istream& is) {
    NameGenderTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (line_no == 1 && line.rfind("name,", 0) == 0) continue;  // optional header
      const auto fields = csv::parse_line(line);
      if (fields.size() != 3) {
        throw DataError("gender table line " + std::to_string(line_no) + ": expected 3 columns");
      }
      const std::string& gender = fields[1];
      if (gender != kFemale && gender != kMale) {
        throw DataError("gender table line " + std::to_string(line_no) + ": bad gender '" +
                        gender + "'");
      }
      double probability = 0.0;
      try {
        probability = std::stod(fields[2]);
      } catch (const std::exception&) {
        throw DataError("gender table line " + std::to_string(line_no) + ": bad probability");
      }
      if (probability < 0.5 || probability > 1.0) {
        throw DataError("gender table line " + std::to_string(line_no) +
                        ": probability outside [0.5, 1]");
      }
      table.entries[text::fold_lower(fields[0])] = {gender, probability};
    }
    return table;
  }
};

enum class GenderMethod { table, manual, none };

inline const char* gender_method_name(GenderMethod m) {
  switch (m) {
    case GenderMethod::table: return "table";
    case GenderMethod::manual: return "manual";
    default: return "none";
  }
}

struct GenderEntry {
  std::string label;  // female | male | unknown
  GenderMethod method = GenderMethod::none;

  bool operator==(const GenderEntry&) const = default;
};

struct GenderAssignment {
  std::map<std::string, GenderEntry> by_researcher;

  const std::string& label_of(const std::string& researcher_id) const {
    static const std::string unknown = kUnknownGender;
    const auto it = by_researcher.find(researcher_id);
    return it == by_researcher.end() ? unknown : it->second.label;
  }

  double coverage() const {
    if (by_researcher.empty()) return 0.0;
    std::size_t known = 0;
    for (const auto& [id, e] : by_researcher) known += e.label != kUnknownGender ? 1 : 0;
    return static_cast<double>(known) / static_cast<double>(by_researcher.size());
  }
};

// Manual override wins; otherwise a table hit with probability >= floor;
// otherwise unknown with method none.
inline GenderAssignment assign_gender(
    const std::map<std::string, std::string>& researcher_names, const NameGenderTable& table,
    double probability_floor = 0.8,
    const std::map<std::string, std::string>& manual_overrides = {}) {
  GenderAssignment assignment;
  for (const auto& [researcher_id, full_name] : researcher_names) {
    const auto ov = manual_overrides.find(researcher_id);
    if (ov != manual_overrides.end()) {
      if (ov->second != kFemale && ov->second != kMale) {
        throw DataError("manual override for " + researcher_id + " must be female or male");
      }
      assignment.by_researcher[researcher_id] = {ov->second, GenderMethod::manual};
      continue;
    }
    const std::string first = normalize_first_name(full_name);
    if (!first.empty()) {
      const auto hit = table.entries.find(first);
      if (hit != table.entries.end() && hit->second.second >= probability_floor) {
        assignment.by_researcher[researcher_id] = {hit->second.first, GenderMethod::table};
        continue;
      }
    }
    assignment.by_researcher[researcher_id] = {kUnknownGender, GenderMethod::none};
  }
  return assignment;
}

// The most frequent full name among a researcher's records (ties resolved
// lexicographically) — the name a profile is looked up under.
inline std::string representative_name(const std::vector<const AuthorshipRecord*>& records) {
  std::map<std::string, std::size_t> counts;
  for (const auto* r : records) ++counts[r->author_full_name];
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [name, count] : counts) {
    if (count > best_count) {
      best = name;
      best_count = count;
    }
  }
  return best;
}

inline std::map<std::string, std::string> read_overrides_csv(std::istream& is) {
  std::map<std::string, std::string> overrides;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("revised_author_id,", 0) == 0) continue;
    const auto fields = csv::parse_line(line);
    if (fields.size() != 2) {
      throw DataError("override line " + std::to_string(line_no) + ": expected 2 columns");
    }
    overrides[fields[0]] = fields[1];
  }
  return overrides;
}

}  // namespace scholmig
