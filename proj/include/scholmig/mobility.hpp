#pragma once

// Migration life courses from yearly affiliation countries. For each
// researcher the most frequent (mode) country set is extracted per year, ties
// and publication gaps are resolved into an effective-country series, change
// points become migration events, and researchers are classified into the
// four mobility categories relative to Germany.
//
// Tie and gap resolution:
//   - singleton mode set: that country;
//   - tie set containing the previous effective country: the previous one
//     (hysteresis, so spurious events are not created);
//   - other tie set: lexicographically smallest code;
//   - gap year (no resolvable records): carry the previous year forward;
//   - leading gap or tie before any history: smallest code / first resolvable
//     year backfilled.

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "scholmig/countries.hpp"
#include "scholmig/csv.hpp"
#include "scholmig/disambiguator.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/record.hpp"

namespace scholmig {

// Countries attaining the maximum record count; empty input yields an empty
// set (the caller omits that year from the series).
inline std::set<std::string> mode_countries(const std::vector<std::string>& countries) {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : countries) ++counts[c];
  std::size_t best = 0;
  for (const auto& [c, n] : counts) best = std::max(best, n);
  std::set<std::string> mode;
  for (const auto& [c, n] : counts) {
    if (n == best && best > 0) mode.insert(c);
  }
  return mode;
}

struct ResearcherTimeline {
  std::string researcher_id;
  int first_pub_year = 0;
  int last_pub_year = 0;
  std::map<int, std::set<std::string>> yearly_mode;
  std::vector<std::string> effective;  // index: year - first_pub_year
  std::string origin_country;
  std::string current_country;

  const std::string& effective_at(int year) const {
    if (year < first_pub_year || year > last_pub_year) {
      throw DataError("year " + std::to_string(year) + " outside timeline of " + researcher_id);
    }
    return effective[static_cast<std::size_t>(year - first_pub_year)];
  }
};

// Builds the timeline of one researcher from their records. Returns nullopt
// when no record has a resolvable country (such researchers cannot be placed
// at all). first/last publication years are taken over all records, resolved
// country or not.
inline std::optional<ResearcherTimeline> build_timeline(
    const std::string& researcher_id, const std::vector<const AuthorshipRecord*>& records) {
  if (records.empty()) return std::nullopt;
  ResearcherTimeline tl;
  tl.researcher_id = researcher_id;
  tl.first_pub_year = records.front()->year;
  tl.last_pub_year = records.front()->year;
  std::map<int, std::vector<std::string>> yearly_countries;
  for (const auto* r : records) {
    tl.first_pub_year = std::min(tl.first_pub_year, r->year);
    tl.last_pub_year = std::max(tl.last_pub_year, r->year);
    if (r->affiliation.country) yearly_countries[r->year].push_back(*r->affiliation.country);
  }
  for (const auto& [year, countries] : yearly_countries) {
    auto mode = mode_countries(countries);
    if (!mode.empty()) tl.yearly_mode.emplace(year, std::move(mode));
  }
  if (tl.yearly_mode.empty()) return std::nullopt;

  const int span = tl.last_pub_year - tl.first_pub_year + 1;
  tl.effective.assign(static_cast<std::size_t>(span), {});
  std::string previous;
  for (int year = tl.first_pub_year; year <= tl.last_pub_year; ++year) {
    const auto it = tl.yearly_mode.find(year);
    std::string resolved;
    if (it == tl.yearly_mode.end()) {
      resolved = previous;  // gap: carry forward (may still be empty while leading)
    } else if (it->second.size() == 1) {
      resolved = *it->second.begin();
    } else if (!previous.empty() && it->second.count(previous)) {
      resolved = previous;  // hysteresis
    } else {
      resolved = *it->second.begin();  // lexicographically smallest
    }
    tl.effective[static_cast<std::size_t>(year - tl.first_pub_year)] = resolved;
    previous = resolved;
  }
  // Backfill a leading gap from the first resolvable year.
  std::string first_resolved;
  for (const auto& c : tl.effective) {
    if (!c.empty()) {
      first_resolved = c;
      break;
    }
  }
  for (auto& c : tl.effective) {
    if (c.empty()) {
      c = first_resolved;
    } else {
      break;
    }
  }
  tl.origin_country = tl.effective.front();
  tl.current_country = tl.effective.back();
  return tl;
}

// Timelines for every researcher of a store under revised ids, keyed by
// revised id. Researchers without any resolvable country are listed
// separately.
struct TimelineSet {
  std::map<std::string, ResearcherTimeline> by_researcher;
  std::vector<std::string> unresolved;
};

inline TimelineSet build_timelines(const RecordStore& store, const RevisedIdMap& revised) {
  std::map<std::string, std::vector<const AuthorshipRecord*>> grouped;
  for (const auto& r : store.records()) {
    grouped[revised.revised_of(r.record_id)].push_back(&r);
  }
  TimelineSet set;
  for (const auto& [researcher_id, records] : grouped) {
    auto tl = build_timeline(researcher_id, records);
    if (tl) {
      set.by_researcher.emplace(researcher_id, std::move(*tl));
    } else {
      set.unresolved.push_back(researcher_id);
    }
  }
  return set;
}

struct MigrationEvent {
  std::string researcher_id;
  int year = 0;  // first year the new country is observed
  std::string from_country;
  std::string to_country;

  bool operator==(const MigrationEvent&) const = default;
  auto operator<=>(const MigrationEvent&) const = default;
};

// One event per change point of the effective-country series.
inline std::vector<MigrationEvent> detect_events(const ResearcherTimeline& tl) {
  std::vector<MigrationEvent> events;
  for (int year = tl.first_pub_year + 1; year <= tl.last_pub_year; ++year) {
    const auto& prev = tl.effective[static_cast<std::size_t>(year - 1 - tl.first_pub_year)];
    const auto& cur = tl.effective[static_cast<std::size_t>(year - tl.first_pub_year)];
    if (cur != prev) events.push_back({tl.researcher_id, year, prev, cur});
  }
  return events;
}

enum class MobilityCategory { non_mover, immigrant_or_transient, outward, returnee };

inline const char* mobility_category_name(MobilityCategory c) {
  switch (c) {
    case MobilityCategory::non_mover: return "non_mover";
    case MobilityCategory::immigrant_or_transient: return "immigrant_or_transient";
    case MobilityCategory::outward: return "outward";
    default: return "returnee";
  }
}

// Category of a researcher as of evaluation_year (observation is censored at
// the last publication year). Returns nullopt for researchers whose effective
// series never touches Germany: they are outside the study population.
inline std::optional<MobilityCategory> classify(const ResearcherTimeline& tl,
                                                int evaluation_year) {
  if (evaluation_year < tl.first_pub_year) {
    throw DataError("evaluation year precedes first publication of " + tl.researcher_id);
  }
  const int horizon = std::min(evaluation_year, tl.last_pub_year);
  const std::string de(countries::kGermany);
  const auto at = [&](int year) -> const std::string& {
    return tl.effective[static_cast<std::size_t>(year - tl.first_pub_year)];
  };

  bool all_de = true;
  bool any_de = false;
  bool any_non_de_between = false;
  for (int y = tl.first_pub_year; y <= horizon; ++y) {
    const bool is_de = at(y) == de;
    all_de = all_de && is_de;
    any_de = any_de || is_de;
    if (y > tl.first_pub_year && y < horizon && !is_de) any_non_de_between = true;
  }
  const std::string& origin = at(tl.first_pub_year);
  const std::string& current = at(horizon);

  if (!any_de) return std::nullopt;
  if (all_de) return MobilityCategory::non_mover;
  if (origin == de && current != de) return MobilityCategory::outward;
  if (origin == de && current == de && any_non_de_between) return MobilityCategory::returnee;
  if (origin != de) return MobilityCategory::immigrant_or_transient;
  return MobilityCategory::non_mover;  // unreachable: origin DE, current DE, no excursion
}

inline int academic_age(const ResearcherTimeline& tl, int year) {
  if (year < tl.first_pub_year) {
    throw DataError("year precedes first publication of " + tl.researcher_id);
  }
  return year - tl.first_pub_year;
}

enum class CareerStage { early, mid, senior };

inline const char* career_stage_name(CareerStage s) {
  switch (s) {
    case CareerStage::early: return "early";
    case CareerStage::mid: return "mid";
    default: return "senior";
  }
}

// Early career through age seven, senior from age 14.
inline CareerStage career_stage(int age) {
  if (age < 0) throw DataError("academic age cannot be negative");
  if (age <= 7) return CareerStage::early;
  if (age >= 14) return CareerStage::senior;
  return CareerStage::mid;
}

inline void write_events_csv(const std::vector<MigrationEvent>& events, std::ostream& os) {
  os << "revised_author_id,year,from_country,to_country\n";
  for (const auto& e : events) {
    os << csv::join_row({e.researcher_id, std::to_string(e.year), e.from_country, e.to_country});
  }
}

inline std::vector<MigrationEvent> read_events_csv(std::istream& is) {
  std::vector<MigrationEvent> events;
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty events file");
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = csv::parse_line(line);
    if (fields.size() != 4) {
      throw DataError("events line " + std::to_string(line_no) + ": expected 4 columns");
    }
    try {
      events.push_back({fields[0], std::stoi(fields[1]), fields[2], fields[3]});
    } catch (const std::exception&) {
      throw DataError("events line " + std::to_string(line_no) + ": bad year");
    }
  }
  return events;
}

}  // namespace scholmig
