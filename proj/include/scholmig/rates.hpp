#pragma once

// Cohort person-time rates. Departure rate = departures per 1,000 person-years
// in Germany; return rate = first returns per 1,000 person-years abroad.
//
// Person-time bookkeeping: every observed year contributes one person-year to
// the state it was spent in (calendar attribution, censored at the horizon).
// Each cell additionally tracks at-risk person-years — years whose outgoing
// transition is still observable (y precedes the horizon) — which is the
// binomial trial count hazard-recovery checks need, since the terminal
// observed year can never produce a visible event. A researcher abroad leaves
// the at-risk-of-return population at the first return; later excursions
// contribute departures and in-Germany exposure again, but no further
// returns.
//
// Strata: gender ("all" rows include unknown-gender researchers, female/male
// rows never do), academic age at departure (exposure year y belongs to the
// age it could produce a departure at, y - first + 1), and years since
// departure for the return side.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "scholmig/countries.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/gender.hpp"
#include "scholmig/mobility.hpp"
#include "scholmig/record.hpp"

namespace scholmig {

struct Cohort {
  std::string label;
  int start_year = 0;
  int end_year = 0;

  bool contains(int year) const { return year >= start_year && year <= end_year; }
  bool operator==(const Cohort&) const = default;
};

inline const std::vector<Cohort>& canonical_cohorts() {
  static const std::vector<Cohort> cohorts = {
      {"1998-2001", 1998, 2001},
      {"2002-2005", 2002, 2005},
      {"2006-2009", 2006, 2009},
  };
  return cohorts;
}

inline std::optional<Cohort> assign_cohort(int first_pub_year,
                                           const std::vector<Cohort>& cohorts) {
  for (const auto& c : cohorts) {
    if (c.contains(first_pub_year)) return c;
  }
  return std::nullopt;
}

inline std::optional<Cohort> assign_cohort(int first_pub_year) {
  return assign_cohort(first_pub_year, canonical_cohorts());
}

struct ExposureCell {
  double person_years_in_germany = 0.0;
  double person_years_outside = 0.0;
  // Years whose outgoing transition is observable; the binomial n for hazard
  // checks. Always <= the calendar person-years above.
  double at_risk_person_years_in_germany = 0.0;
  double at_risk_person_years_outside = 0.0;
  std::int64_t departures = 0;
  std::int64_t returns = 0;

  bool operator==(const ExposureCell&) const = default;
};

struct StratumKey {
  std::string gender;            // "all", "female", "male"
  int age_at_departure = -1;     // -1: unstratified
  int years_since_departure = -1;

  auto operator<=>(const StratumKey&) const = default;
};

struct ExposureLedger {
  std::string cohort_label;
  int period_start = 0;
  int period_end = 0;
  std::map<StratumKey, ExposureCell> cells;
  ExposureCell total;

  bool operator==(const ExposureLedger&) const = default;
};

struct ExposureOptions {
  // true: censor observation at the last publication year (location is
  // unobservable afterwards); false: carry the last effective country forward
  // to window_end.
  bool censor_at_last_pub = true;
  int window_end = kWindowEndYear;
};

struct AnalysisResearcher {
  const ResearcherTimeline* timeline = nullptr;
  std::string gender;  // female | male | unknown
};

namespace detail {

struct SpellInfo {
  std::optional<int> departure_year;     // first DE -> X change point
  std::optional<int> first_return_year;  // first X -> DE change point after it
};

inline SpellInfo first_spell(const std::vector<std::string>& series, int first_year,
                             int horizon) {
  SpellInfo info;
  const std::string de(countries::kGermany);
  for (int y = first_year + 1; y <= horizon; ++y) {
    const auto& prev = series[static_cast<std::size_t>(y - 1 - first_year)];
    const auto& cur = series[static_cast<std::size_t>(y - first_year)];
    if (!info.departure_year && prev == de && cur != de) info.departure_year = y;
    if (info.departure_year && !info.first_return_year && y > *info.departure_year &&
        prev != de && cur == de) {
      info.first_return_year = y;
    }
  }
  return info;
}

}  // namespace detail

// Effective-country series of a timeline over [first_pub_year, horizon],
// carrying the last observed country forward when the horizon lies past the
// last publication year.
inline std::vector<std::string> effective_series(const ResearcherTimeline& tl, int horizon) {
  std::vector<std::string> series;
  series.reserve(static_cast<std::size_t>(horizon - tl.first_pub_year + 1));
  for (int y = tl.first_pub_year; y <= horizon; ++y) {
    series.push_back(y <= tl.last_pub_year ? tl.effective_at(y) : tl.effective.back());
  }
  return series;
}

inline ExposureLedger accumulate_exposure(const std::vector<AnalysisResearcher>& researchers,
                                          const Cohort& cohort, int period_start, int period_end,
                                          const ExposureOptions& options = {}) {
  if (period_start > period_end) throw DataError("period start after period end");
  ExposureLedger ledger;
  ledger.cohort_label = cohort.label;
  ledger.period_start = period_start;
  ledger.period_end = period_end;
  const std::string de(countries::kGermany);

  for (const auto& researcher : researchers) {
    const auto& tl = *researcher.timeline;
    if (!cohort.contains(tl.first_pub_year)) continue;

    const int horizon =
        options.censor_at_last_pub ? tl.last_pub_year : std::max(tl.last_pub_year,
                                                                 options.window_end);
    const auto series = effective_series(tl, horizon);
    const auto spell = detail::first_spell(series, tl.first_pub_year, horizon);

    std::vector<std::string> gender_keys = {"all"};
    if (researcher.gender == kFemale || researcher.gender == kMale) {
      gender_keys.push_back(researcher.gender);
    }
    const auto add = [&](const StratumKey& key, auto member, auto amount) {
      auto& cell = ledger.cells[key];
      cell.*member += amount;
    };

    const int age_at_departure =
        spell.departure_year ? *spell.departure_year - tl.first_pub_year : -1;

    for (int y = std::max(tl.first_pub_year, period_start); y <= std::min(horizon, period_end);
         ++y) {
      const bool at_risk = y < horizon;  // transition out of y still observable
      const auto& where = series[static_cast<std::size_t>(y - tl.first_pub_year)];
      if (where == de) {
        const int age_next = y - tl.first_pub_year + 1;
        ledger.total.person_years_in_germany += 1.0;
        if (at_risk) ledger.total.at_risk_person_years_in_germany += 1.0;
        for (const auto& g : gender_keys) {
          add({g, -1, -1}, &ExposureCell::person_years_in_germany, 1.0);
          add({g, age_next, -1}, &ExposureCell::person_years_in_germany, 1.0);
          if (at_risk) {
            add({g, -1, -1}, &ExposureCell::at_risk_person_years_in_germany, 1.0);
            add({g, age_next, -1}, &ExposureCell::at_risk_person_years_in_germany, 1.0);
          }
        }
      } else if (spell.departure_year && y >= *spell.departure_year &&
                 (!spell.first_return_year || y < *spell.first_return_year)) {
        const int ysd_next = y - *spell.departure_year + 1;
        ledger.total.person_years_outside += 1.0;
        if (at_risk) ledger.total.at_risk_person_years_outside += 1.0;
        for (const auto& g : gender_keys) {
          add({g, -1, -1}, &ExposureCell::person_years_outside, 1.0);
          add({g, -1, ysd_next}, &ExposureCell::person_years_outside, 1.0);
          add({g, age_at_departure, ysd_next}, &ExposureCell::person_years_outside, 1.0);
          if (at_risk) {
            add({g, -1, -1}, &ExposureCell::at_risk_person_years_outside, 1.0);
            add({g, -1, ysd_next}, &ExposureCell::at_risk_person_years_outside, 1.0);
            add({g, age_at_departure, ysd_next}, &ExposureCell::at_risk_person_years_outside,
                1.0);
          }
        }
      }
    }

    for (int y = std::max(tl.first_pub_year + 1, period_start); y <= std::min(horizon, period_end);
         ++y) {
      const auto& prev = series[static_cast<std::size_t>(y - 1 - tl.first_pub_year)];
      const auto& cur = series[static_cast<std::size_t>(y - tl.first_pub_year)];
      if (prev == de && cur != de) {
        const int age = y - tl.first_pub_year;
        ledger.total.departures += 1;
        for (const auto& g : gender_keys) {
          add({g, -1, -1}, &ExposureCell::departures, std::int64_t{1});
          add({g, age, -1}, &ExposureCell::departures, std::int64_t{1});
        }
      }
      if (spell.first_return_year && y == *spell.first_return_year) {
        const int ysd = y - *spell.departure_year;
        ledger.total.returns += 1;
        for (const auto& g : gender_keys) {
          add({g, -1, -1}, &ExposureCell::returns, std::int64_t{1});
          add({g, -1, ysd}, &ExposureCell::returns, std::int64_t{1});
          add({g, age_at_departure, ysd}, &ExposureCell::returns, std::int64_t{1});
        }
      }
    }
  }
  return ledger;
}

struct RateResult {
  double rate_per_1000 = 0.0;
  double person_years = 0.0;
  std::int64_t events = 0;
};

inline RateResult departure_rate(const ExposureCell& cell) {
  if (!(cell.person_years_in_germany > 0.0)) {
    throw DataError("departure rate undefined: zero in-Germany exposure");
  }
  return {static_cast<double>(cell.departures) / cell.person_years_in_germany * 1000.0,
          cell.person_years_in_germany, cell.departures};
}

inline RateResult return_rate(const ExposureCell& cell) {
  if (!(cell.person_years_outside > 0.0)) {
    throw DataError("return rate undefined: zero outside-Germany exposure");
  }
  return {static_cast<double>(cell.returns) / cell.person_years_outside * 1000.0,
          cell.person_years_outside, cell.returns};
}

// First-departure facts of one researcher over their observed series.
struct OutwardStatus {
  bool outward = false;             // has a first DE -> X change point
  bool returned = false;            // has a first return after it
  std::optional<int> departure_year;
  std::string first_host;           // effective country at the departure year
};

inline OutwardStatus outward_status(const ResearcherTimeline& tl) {
  const auto series = effective_series(tl, tl.last_pub_year);
  const auto spell = detail::first_spell(series, tl.first_pub_year, tl.last_pub_year);
  OutwardStatus status;
  status.outward = spell.departure_year.has_value();
  status.returned = spell.first_return_year.has_value();
  status.departure_year = spell.departure_year;
  if (spell.departure_year) {
    status.first_host =
        series[static_cast<std::size_t>(*spell.departure_year - tl.first_pub_year)];
  }
  return status;
}

// Fraction of the outward researchers whose first post-departure country is
// host_country that subsequently return to Germany within observation.
inline double country_return_share(const std::vector<const ResearcherTimeline*>& timelines,
                                   const std::string& host_country) {
  const std::string de(countries::kGermany);
  std::int64_t outward = 0;
  std::int64_t returned = 0;
  for (const auto* tl : timelines) {
    const auto series = effective_series(*tl, tl->last_pub_year);
    const auto spell = detail::first_spell(series, tl->first_pub_year, tl->last_pub_year);
    if (!spell.departure_year) continue;
    const auto& host =
        series[static_cast<std::size_t>(*spell.departure_year - tl->first_pub_year)];
    if (host != host_country) continue;
    ++outward;
    if (spell.first_return_year) ++returned;
  }
  if (outward == 0) {
    throw DataError("return share undefined: no outward researchers to " + host_country);
  }
  return static_cast<double>(returned) / static_cast<double>(outward);
}

struct CollabRatio {
  std::string researcher_id;
  std::int64_t de_linked = 0;  // D: abroad-period publications with any German affiliation
  std::int64_t total = 0;      // N: all abroad-period publications
  double ratio = 0.0;
};

// Countries present on each publication across the whole store, regardless of
// author — the lookup that turns a shared publication_id into coauthor
// affiliation evidence.
struct PublicationCountryIndex {
  std::map<std::string, std::set<std::string>> countries_by_publication;

  static PublicationCountryIndex build(const RecordStore& store) {
    PublicationCountryIndex index;
    for (const auto& r : store.records()) {
      if (r.affiliation.country) {
        index.countries_by_publication[r.publication_id].insert(*r.affiliation.country);
      }
    }
    return index;
  }

  bool has_country(const std::string& publication_id, const std::string& country) const {
    const auto it = countries_by_publication.find(publication_id);
    return it != countries_by_publication.end() && it->second.count(country) > 0;
  }
};

// CR = D / N over the researcher's abroad years (post-departure years whose
// effective country is not Germany). Throws when the researcher has no
// abroad-period publication; such researchers are excluded from CR aggregates.
inline CollabRatio collaborative_ratio(const ResearcherTimeline& tl,
                                       const std::vector<const AuthorshipRecord*>& records,
                                       const PublicationCountryIndex& index) {
  const std::string de(countries::kGermany);
  const auto series = effective_series(tl, tl.last_pub_year);
  const auto spell = detail::first_spell(series, tl.first_pub_year, tl.last_pub_year);

  std::set<std::string> abroad_publications;
  for (const auto* r : records) {
    if (!spell.departure_year || r->year < *spell.departure_year) continue;
    if (r->year > tl.last_pub_year) continue;
    const auto& where = series[static_cast<std::size_t>(r->year - tl.first_pub_year)];
    if (where == de) continue;
    abroad_publications.insert(r->publication_id);
  }
  if (abroad_publications.empty()) {
    throw DataError("no abroad-period publications for " + tl.researcher_id);
  }
  CollabRatio cr;
  cr.researcher_id = tl.researcher_id;
  cr.total = static_cast<std::int64_t>(abroad_publications.size());
  for (const auto& pub : abroad_publications) {
    if (index.has_country(pub, de)) ++cr.de_linked;
  }
  cr.ratio = static_cast<double>(cr.de_linked) / static_cast<double>(cr.total);
  return cr;
}

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DataError("pearson: length mismatch");
  if (xs.size() < 2) throw DataError("pearson: need at least 2 points");
  const double n = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson undefined: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

// Outward flows and return shares per first host country (the data behind
// country-level flow maps).
struct CountryFlowRow {
  std::string host_country;
  std::int64_t outward = 0;
  double share_of_outward = 0.0;
  std::int64_t returned = 0;
  double return_share = 0.0;
};

inline std::vector<CountryFlowRow> country_flow_table(
    const std::map<std::string, ResearcherTimeline>& timelines) {
  std::map<std::string, std::pair<std::int64_t, std::int64_t>> by_host;
  std::int64_t total_outward = 0;
  for (const auto& [researcher, tl] : timelines) {
    const auto status = outward_status(tl);
    if (!status.outward) continue;
    ++by_host[status.first_host].first;
    ++total_outward;
    if (status.returned) ++by_host[status.first_host].second;
  }
  std::vector<CountryFlowRow> rows;
  for (const auto& [host, counts] : by_host) {
    rows.push_back({host, counts.first,
                    static_cast<double>(counts.first) / static_cast<double>(total_outward),
                    counts.second,
                    static_cast<double>(counts.second) / static_cast<double>(counts.first)});
  }
  return rows;
}

// Per-discipline return shares vs. mean collaborative ratios, overall and per
// cohort, with the cross-discipline Pearson correlation per scope.
struct ReturnCollabScatter {
  struct Row {
    std::string scope;  // "overall" or a cohort label
    std::string discipline;
    std::int64_t outward = 0;
    std::int64_t returned = 0;
    double return_share = 0.0;
    bool has_ratio = false;
    double mean_collab_ratio = 0.0;
  };
  struct Correlation {
    std::string scope;
    bool defined = false;
    double pearson_r = 0.0;
    std::size_t n = 0;  // disciplines entering the correlation
  };
  std::vector<Row> rows;                  // ordered by (scope, discipline)
  std::vector<Correlation> correlations;  // ordered by scope
};

inline ReturnCollabScatter discipline_return_collab(
    const std::map<std::string, ResearcherTimeline>& timelines,
    const std::map<std::string, std::string>& researcher_disciplines,
    const std::map<std::string, CollabRatio>& collab_ratios,
    const std::vector<Cohort>& cohorts) {
  struct Bucket {
    std::int64_t outward = 0;
    std::int64_t returned = 0;
    std::vector<double> ratios;
  };
  std::map<std::pair<std::string, std::string>, Bucket> buckets;
  for (const auto& [researcher, tl] : timelines) {
    const auto status = outward_status(tl);
    if (!status.outward) continue;
    const auto discipline = researcher_disciplines.find(researcher);
    if (discipline == researcher_disciplines.end()) continue;
    std::vector<std::string> scopes = {"overall"};
    if (const auto cohort = assign_cohort(tl.first_pub_year, cohorts)) {
      scopes.push_back(cohort->label);
    }
    for (const auto& scope : scopes) {
      auto& bucket = buckets[{scope, discipline->second}];
      ++bucket.outward;
      if (status.returned) ++bucket.returned;
      const auto ratio = collab_ratios.find(researcher);
      if (ratio != collab_ratios.end()) bucket.ratios.push_back(ratio->second.ratio);
    }
  }
  ReturnCollabScatter scatter;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> correlation_inputs;
  for (const auto& [key, bucket] : buckets) {
    ReturnCollabScatter::Row row;
    row.scope = key.first;
    row.discipline = key.second;
    row.outward = bucket.outward;
    row.returned = bucket.returned;
    row.return_share = static_cast<double>(bucket.returned) / static_cast<double>(bucket.outward);
    if (!bucket.ratios.empty()) {
      row.has_ratio = true;
      for (const double r : bucket.ratios) row.mean_collab_ratio += r;
      row.mean_collab_ratio /= static_cast<double>(bucket.ratios.size());
      correlation_inputs[row.scope].first.push_back(row.mean_collab_ratio);
      correlation_inputs[row.scope].second.push_back(row.return_share);
    }
    scatter.rows.push_back(std::move(row));
  }
  for (const auto& [scope, xy] : correlation_inputs) {
    ReturnCollabScatter::Correlation c;
    c.scope = scope;
    c.n = xy.first.size();
    try {
      c.pearson_r = pearson(xy.first, xy.second);
      c.defined = true;
    } catch (const DataError&) {
      // fewer than 2 disciplines or zero variance: left undefined
    }
    scatter.correlations.push_back(std::move(c));
  }
  return scatter;
}

// Fixed schema shared by departure and return rows; departure rows leave
// years_since_departure empty.
inline void write_rate_table_csv(
    std::ostream& os,
    const std::vector<std::tuple<std::string, StratumKey, bool, RateResult>>& rows) {
  os << "cohort,gender,age_at_departure,years_since_departure,person_years,events,"
        "rate_per_1000\n";
  char buffer[64];
  for (const auto& [cohort, key, is_return, rate] : rows) {
    std::snprintf(buffer, sizeof(buffer), "%.12g", rate.person_years);
    std::string py(buffer);
    std::snprintf(buffer, sizeof(buffer), "%.12g", rate.rate_per_1000);
    std::string r(buffer);
    os << csv::join_row({cohort, key.gender,
                         key.age_at_departure >= 0 ? std::to_string(key.age_at_departure)
                                                   : std::string(),
                         is_return ? std::to_string(key.years_since_departure) : std::string(),
                         py, std::to_string(rate.events), r});
  }
}

}  // namespace scholmig
