#pragma once

// Synthetic scholarly populations with planted ground truth: identities,
// yearly countries, migration moves realized from per-year hazards, genders,
// topics, coauthor links to Germany, missing countries, tie years, and
// two-identity merged profiles. Every draw is counter-based on
// (seed, identity, purpose, sub-stream), so output is byte-stable and
// independent of generation order. The module also provides the brute-force
// exposure oracle and the inference scoring used to validate every pipeline
// stage.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scholmig/assignment.hpp"
#include "scholmig/countries.hpp"
#include "scholmig/disambiguator.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/mobility.hpp"
#include "scholmig/rates.hpp"
#include "scholmig/record.hpp"
#include "scholmig/rng.hpp"
#include "scholmig/text.hpp"

namespace scholmig {

struct GeneratorConfig {
  int researcher_count = 100;
  int first_pub_year_min = 1998;
  int first_pub_year_max = 1998;
  int observed_years = 15;
  double publications_per_year = 2.0;
  // Hazard vectors are indexed by academic age at departure / years since
  // departure at return (1-based outcomes, index 0 = first possible year);
  // the last entry extends to all later ages.
  std::vector<double> departure_hazard_female{0.01};
  std::vector<double> departure_hazard_male{0.01};
  std::vector<double> return_hazard{0.15};
  double origin_abroad_probability = 0.0;
  double tie_injection_probability = 0.0;
  double missing_country_probability = 0.0;
  double merge_contamination_rate = 0.0;
  int merged_profile_publications_per_year = 10;
  double coauthor_de_link_probability = 0.35;
  int topic_count = 3;
  int topic_vocab_size = 40;
  int title_tokens = 6;
  int keyword_tokens = 3;
  std::uint64_t seed = 0;

  void validate() const {
    if (researcher_count < 1) throw DataError("degenerate config: researcher_count < 1");
    if (observed_years < 1) throw DataError("observed_years must be >= 1");
    if (first_pub_year_min > first_pub_year_max) throw DataError("bad first_pub_year range");
    if (first_pub_year_min < kWindowStartYear || first_pub_year_max > kWindowEndYear) {
      throw DataError("first publication years must lie in the observation window");
    }
    const auto check_prob = [](double p, const char* name) {
      if (p < 0.0 || p > 1.0) throw DataError(std::string(name) + " must lie in [0, 1]");
    };
    check_prob(origin_abroad_probability, "origin_abroad_probability");
    check_prob(tie_injection_probability, "tie_injection_probability");
    check_prob(missing_country_probability, "missing_country_probability");
    check_prob(merge_contamination_rate, "merge_contamination_rate");
    check_prob(coauthor_de_link_probability, "coauthor_de_link_probability");
    const auto check_hazards = [](const std::vector<double>& h, const char* name) {
      if (h.empty()) throw DataError(std::string(name) + " must not be empty");
      for (double v : h) {
        if (v < 0.0 || v > 1.0) throw DataError(std::string(name) + " entries must lie in [0, 1]");
      }
    };
    check_hazards(departure_hazard_female, "departure_hazard_female");
    check_hazards(departure_hazard_male, "departure_hazard_male");
    check_hazards(return_hazard, "return_hazard");
    if (topic_count < 1) throw DataError("topic_count must be >= 1");
    if (topic_vocab_size < 1) throw DataError("topic_vocab_size must be >= 1");
    if (publications_per_year <= 0.0) throw DataError("publications_per_year must be positive");
    // stream sub-indexing packs the token slot into 4 bits
    if (title_tokens < 1 || title_tokens > 16) throw DataError("title_tokens must be in [1, 16]");
    if (keyword_tokens < 1 || keyword_tokens > 16) {
      throw DataError("keyword_tokens must be in [1, 16]");
    }
  }
};

struct TrueResearcher {
  std::string identity_id;
  std::string author_id;  // source profile id; merged identities share one
  std::string full_name;
  std::string gender;
  int first_pub_year = 0;
  int last_pub_year = 0;
  int topic = 0;
  std::map<int, std::string> yearly_country;
  std::vector<MigrationEvent> events;
  std::vector<std::string> record_ids;
  std::int64_t collab_de_linked = 0;
  std::int64_t collab_total = 0;
};

struct GroundTruth {
  std::vector<TrueResearcher> researchers;
  std::map<std::string, std::string> record_identity;  // record_id -> identity_id
  std::map<std::string, std::string> hidden_country;   // record_id -> true country
  int topic_count = 0;
};

namespace synth_detail {

inline const std::vector<std::string>& host_countries() {
  static const std::vector<std::string> hosts = {"US", "GB", "FR", "CH", "NL",
                                                 "AT", "SE", "IT", "ES", "CA"};
  return hosts;
}

inline const std::vector<std::string>& female_names() {
  static const std::vector<std::string> names = {
      "Anna", "Maria", "Julia", "Laura", "Sophie", "Emma", "Lena", "Clara", "Johanna",
      "Katharina", "Sabine", "Monika", "Petra", "Claudia", "Andrea", "Christine",
      "Nicole", "Stefanie", "Susanne", "Birgit"};
  return names;
}

inline const std::vector<std::string>& male_names() {
  static const std::vector<std::string> names = {
      "Peter", "Hans", "Thomas", "Martin", "Jan", "Stefan", "Andreas", "Michael",
      "Markus", "Christian", "Wolfgang", "Klaus", "Jurgen", "Dieter", "Rainer",
      "Frank", "Tobias", "Felix", "Lukas", "David"};
  return names;
}

inline const std::vector<std::string>& surnames() {
  static const std::vector<std::string> names = {
      "Muller", "Schmidt", "Schneider", "Fischer", "Weber", "Meyer", "Wagner",
      "Becker", "Schulz", "Hoffmann", "Koch", "Bauer", "Richter", "Klein", "Wolf",
      "Neumann", "Schwarz", "Zimmermann", "Braun", "Kruger"};
  return names;
}

inline const std::vector<std::string>& syllables() {
  // Endings avoid 's', 'e', 'ed', 'ing', 'ly' so synthetic words pass the
  // stemmer unchanged.
  static const std::vector<std::string> syl = {"ba", "do", "fi", "go", "ka", "lo", "mi",
                                               "nu", "po", "ra", "su", "ta", "vi", "wa",
                                               "zo", "bu", "da", "fo", "gi", "ku"};
  return syl;
}

inline std::string two_syllable(int i) {
  const auto& syl = syllables();
  const int n = static_cast<int>(syl.size());
  return syl[static_cast<std::size_t>(i % n)] +
         syl[static_cast<std::size_t>((i / n + i) % n)];
}

inline std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

inline std::string city_name(const std::string& country, int slot) {
  std::string lower;
  for (char c : country) lower.push_back(static_cast<char>(c - 'A' + 'a'));
  return capitalize(lower + two_syllable(slot));
}

inline std::string topic_word(int topic, int slot) {
  return "t" + std::to_string(topic) + two_syllable(slot);
}

inline std::string letter_suffix(int n) {
  std::string s;
  do {
    s.push_back(static_cast<char>('a' + n % 26));
    n /= 26;
  } while (n > 0);
  std::reverse(s.begin(), s.end());
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// Globally unique coauthor names, four per identity, disjoint across
// identities so cross-identity coauthor overlap is impossible.
inline std::string coauthor_name(int global_index) {
  const auto& firsts = female_names();
  const auto& males = male_names();
  const auto& last = surnames();
  const int pool = static_cast<int>(firsts.size() + males.size());
  const int f = global_index % pool;
  const std::string first = f < static_cast<int>(firsts.size())
                                ? firsts[static_cast<std::size_t>(f)]
                                : males[static_cast<std::size_t>(f - firsts.size())];
  const std::string surname = last[static_cast<std::size_t>((global_index / pool) %
                                                            static_cast<int>(last.size()))];
  const int overflow = global_index / (pool * static_cast<int>(last.size()));
  std::string name = first + " " + surname;
  if (overflow > 0) name += " " + letter_suffix(overflow - 1);
  return name;
}

inline std::string pad5(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", n);
  return buf;
}

inline double hazard_at(const std::vector<double>& hazard, int one_based_index) {
  const std::size_t idx = static_cast<std::size_t>(
      std::min<std::size_t>(hazard.size() - 1,
                            static_cast<std::size_t>(std::max(0, one_based_index - 1))));
  return hazard[idx];
}

// Purpose ids for the counter-based streams.
enum Purpose : std::uint64_t {
  P_GENDER = 1,
  P_FIRST_NAME = 2,
  P_SURNAME = 3,
  P_FIRST_YEAR = 4,
  P_ORIGIN = 5,
  P_ORIGIN_HOST = 6,
  P_TOPIC = 7,
  P_MOVE = 10,
  P_HOST = 11,
  P_PUB_COUNT = 13,
  P_TIE = 14,
  P_TIE_COUNTRY = 15,
  P_MISSING = 16,
  P_LINK = 17,
  P_CITY = 18,
  P_INSTITUTION = 19,
  P_ADDRESS = 20,
  P_TITLE = 21,
  P_KEYWORD = 22,
  P_COAUTHOR_DROP = 23,
  P_EXT_NAME = 24,
  P_EXT_GENDER = 25,
  P_EXT_TOPIC = 26,
};

}  // namespace synth_detail

inline std::pair<RecordStore, GroundTruth> generate(const GeneratorConfig& config) {
  namespace sd = synth_detail;
  config.validate();
  const CounterRng rng(config.seed);
  const std::string de(countries::kGermany);
  const auto& hosts = sd::host_countries();

  const int total = config.researcher_count;
  int merged_profiles = 0;
  if (config.merge_contamination_rate > 0.0 && total >= 2) {
    merged_profiles = std::max(
        1, static_cast<int>(config.merge_contamination_rate * static_cast<double>(total) /
                                (1.0 + config.merge_contamination_rate) +
                            0.5));
    merged_profiles = std::min(merged_profiles, total / 2);
  }

  GroundTruth truth;
  truth.topic_count = config.topic_count;
  std::vector<AuthorshipRecord> records;

  // Names first: merged pairs must be dissimilar enough that cross-identity
  // record distance stays above the contamination benchmark's bound.
  std::vector<std::string> genders(static_cast<std::size_t>(total));
  std::vector<std::string> full_names(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    const bool female = rng.bernoulli(0.5, static_cast<std::uint64_t>(i), sd::P_GENDER);
    genders[static_cast<std::size_t>(i)] = female ? kFemale : kMale;
    const auto& pool = female ? sd::female_names() : sd::male_names();
    const auto first =
        pool[rng.hash(static_cast<std::uint64_t>(i), sd::P_FIRST_NAME) % pool.size()];
    const auto surname = sd::surnames()[rng.hash(static_cast<std::uint64_t>(i), sd::P_SURNAME) %
                                        sd::surnames().size()];
    full_names[static_cast<std::size_t>(i)] = first + " " + surname;
  }
  for (int pair = 0; pair < merged_profiles; ++pair) {
    const int a = 2 * pair;
    const int b = 2 * pair + 1;
    std::size_t surname_idx = rng.hash(static_cast<std::uint64_t>(b), sd::P_SURNAME) %
                              sd::surnames().size();
    std::size_t first_idx = rng.hash(static_cast<std::uint64_t>(b), sd::P_FIRST_NAME) %
                            sd::male_names().size();
    for (int attempt = 0; attempt < 400; ++attempt) {
      if (text::name_similarity(full_names[static_cast<std::size_t>(a)],
                                full_names[static_cast<std::size_t>(b)]) < 0.5) {
        break;
      }
      surname_idx = (surname_idx + 1) % sd::surnames().size();
      if (surname_idx == 0) first_idx = (first_idx + 1) % sd::male_names().size();
      const auto& pool = genders[static_cast<std::size_t>(b)] == kFemale ? sd::female_names()
                                                                         : sd::male_names();
      full_names[static_cast<std::size_t>(b)] =
          pool[first_idx % pool.size()] + " " + sd::surnames()[surname_idx];
    }
  }

  int external_counter = 0;
  for (int i = 0; i < total; ++i) {
    const std::uint64_t id = static_cast<std::uint64_t>(i);
    const bool merged = i < 2 * merged_profiles;

    TrueResearcher r;
    r.identity_id = "p" + sd::pad5(i);
    r.author_id = merged ? "m" + sd::pad5(i / 2) : "s" + sd::pad5(i);
    r.full_name = full_names[static_cast<std::size_t>(i)];
    r.gender = genders[static_cast<std::size_t>(i)];
    r.topic = static_cast<int>(rng.hash(id, sd::P_TOPIC) %
                               static_cast<std::uint64_t>(config.topic_count));
    const int year_span = config.first_pub_year_max - config.first_pub_year_min + 1;
    r.first_pub_year = config.first_pub_year_min +
                       static_cast<int>(rng.hash(id, sd::P_FIRST_YEAR) %
                                        static_cast<std::uint64_t>(year_span));
    r.last_pub_year = std::min(r.first_pub_year + config.observed_years - 1, kWindowEndYear);

    // Trajectory: one state per year, transitions drawn from the hazards.
    std::string state = de;
    if (rng.bernoulli(config.origin_abroad_probability, id, sd::P_ORIGIN)) {
      state = hosts[rng.hash(id, sd::P_ORIGIN_HOST) % hosts.size()];
    }
    int spell_start = state == de ? -1 : r.first_pub_year;
    for (int y = r.first_pub_year; y <= r.last_pub_year; ++y) {
      r.yearly_country[y] = state;
      if (y == r.last_pub_year) break;
      if (state == de) {
        const int age_next = y + 1 - r.first_pub_year;
        const auto& hazard = r.gender == kFemale ? config.departure_hazard_female
                                                 : config.departure_hazard_male;
        if (rng.bernoulli(sd::hazard_at(hazard, age_next), id, sd::P_MOVE,
                          static_cast<std::uint64_t>(y))) {
          state = hosts[rng.hash(id, sd::P_HOST, static_cast<std::uint64_t>(y)) % hosts.size()];
          spell_start = y + 1;
        }
      } else {
        const int ysd_next = y + 1 - spell_start;
        if (rng.bernoulli(sd::hazard_at(config.return_hazard, ysd_next), id, sd::P_MOVE,
                          static_cast<std::uint64_t>(y))) {
          state = de;
        }
      }
    }
    for (int y = r.first_pub_year + 1; y <= r.last_pub_year; ++y) {
      const auto& prev = r.yearly_country[y - 1];
      const auto& cur = r.yearly_country[y];
      if (prev != cur) r.events.push_back({r.identity_id, y, prev, cur});
    }

    std::optional<int> first_departure;
    for (const auto& e : r.events) {
      if (e.from_country == de) {
        first_departure = e.year;
        break;
      }
    }

    // Records.
    for (int y = r.first_pub_year; y <= r.last_pub_year; ++y) {
      const std::uint64_t ys = static_cast<std::uint64_t>(y);
      const std::string& country = r.yearly_country[y];
      int pubs = config.merged_profile_publications_per_year;
      if (!merged) {
        DetRng pub_rng(rng.hash(id, sd::P_PUB_COUNT, ys));
        pubs = std::max(1, pub_rng.poisson(config.publications_per_year));
      }
      const bool abroad_spell = first_departure && y >= *first_departure && country != de;

      for (int p = 0; p < pubs; ++p) {
        const std::uint64_t sub = ys * 100 + static_cast<std::uint64_t>(p);
        AuthorshipRecord rec;
        rec.record_id = "r-" + sd::pad5(i) + "-" + std::to_string(y) + "-" + std::to_string(p);
        rec.author_id = r.author_id;
        rec.publication_id =
            "pub-" + sd::pad5(i) + "-" + std::to_string(y) + "-" + std::to_string(p);
        rec.year = y;
        rec.author_full_name = r.full_name;
        const int drop = static_cast<int>(rng.hash(id, sd::P_COAUTHOR_DROP, sub) % 4);
        for (int c = 0; c < 4; ++c) {
          if (c == drop) continue;
          rec.coauthor_names.push_back(sd::coauthor_name(i * 4 + c));
        }
        const int city_slot = static_cast<int>(rng.hash(id, sd::P_CITY, sub) % 40);
        const std::string city = sd::city_name(country, city_slot);
        rec.affiliation.city = city;
        rec.affiliation.institution = rng.hash(id, sd::P_INSTITUTION, sub) % 2 == 0
                                          ? "University of " + city
                                          : city + " Institute of Science";
        rec.affiliation.address_line =
            std::to_string(1 + rng.hash(id, sd::P_ADDRESS, sub) % 90) + " " + city + " Street";
        if (rng.bernoulli(config.missing_country_probability, id, sd::P_MISSING, sub)) {
          rec.affiliation.country = std::nullopt;
          truth.hidden_country[rec.record_id] = country;
        } else {
          rec.affiliation.country = country;
        }
        std::string title;
        for (int w = 0; w < config.title_tokens; ++w) {
          if (w) title.push_back(' ');
          title += sd::topic_word(
              r.topic, static_cast<int>(rng.hash(id, sd::P_TITLE, sub * 16 + static_cast<std::uint64_t>(w)) %
                                        static_cast<std::uint64_t>(config.topic_vocab_size)));
        }
        rec.publication_title = sd::capitalize(title);
        rec.journal_title = "Journal of " + sd::topic_word(r.topic, 0) + " Research";
        for (int w = 0; w < config.keyword_tokens; ++w) {
          rec.keywords.push_back(sd::topic_word(
              r.topic, static_cast<int>(rng.hash(id, sd::P_KEYWORD, sub * 16 + static_cast<std::uint64_t>(w)) %
                                        static_cast<std::uint64_t>(config.topic_vocab_size))));
        }
        for (int t = 0; t < 3; ++t) {
          rec.subject_tags.push_back("tag-" + sd::pad5(i) + "-" + std::to_string(t));
        }
        rec.funding_texts.push_back("Funding Agency " + sd::pad5(i));
        rec.grant_numbers.push_back("GR-" + sd::pad5(i));

        r.record_ids.push_back(rec.record_id);
        truth.record_identity[rec.record_id] = r.identity_id;

        // Collaboration with Germany while abroad: a linked publication gets a
        // companion record from a German external coauthor, sharing the
        // publication id.
        std::optional<AuthorshipRecord> companion;
        if (abroad_spell) {
          ++r.collab_total;
          if (rng.bernoulli(config.coauthor_de_link_probability, id, sd::P_LINK, sub)) {
            ++r.collab_de_linked;
            TrueResearcher ext;
            const int e = external_counter++;
            ext.identity_id = "x" + sd::pad5(e);
            ext.author_id = ext.identity_id;
            const bool ext_female = rng.bernoulli(0.5, id, sd::P_EXT_GENDER, sub);
            ext.gender = ext_female ? kFemale : kMale;
            const auto& pool = ext_female ? sd::female_names() : sd::male_names();
            ext.full_name =
                pool[rng.hash(id, sd::P_EXT_NAME, sub) % pool.size()] + " " +
                sd::surnames()[rng.hash(id, sd::P_EXT_NAME + 100, sub) % sd::surnames().size()];
            ext.first_pub_year = y;
            ext.last_pub_year = y;
            ext.topic = r.topic;  // the companion record reuses the linked publication's text
            ext.yearly_country[y] = de;

            AuthorshipRecord xrec;
            xrec.record_id = "rx-" + sd::pad5(e);
            xrec.author_id = ext.author_id;
            xrec.publication_id = rec.publication_id;
            xrec.year = y;
            xrec.author_full_name = ext.full_name;
            xrec.coauthor_names.push_back(r.full_name);
            const std::string xcity =
                sd::city_name(de, static_cast<int>(rng.hash(id, sd::P_CITY + 50, sub) % 40));
            xrec.affiliation.city = xcity;
            xrec.affiliation.institution = "University of " + xcity;
            xrec.affiliation.address_line = "1 " + xcity + " Street";
            xrec.affiliation.country = de;
            xrec.publication_title = rec.publication_title;
            xrec.journal_title = rec.journal_title;
            xrec.keywords = rec.keywords;
            xrec.subject_tags.push_back("tag-x" + sd::pad5(e));
            xrec.funding_texts.push_back("Funding Agency x" + sd::pad5(e));
            xrec.grant_numbers.push_back("GR-x" + sd::pad5(e));

            ext.record_ids.push_back(xrec.record_id);
            truth.record_identity[xrec.record_id] = ext.identity_id;
            truth.researchers.push_back(std::move(ext));
            companion = std::move(xrec);
          }
        }
        records.push_back(std::move(rec));
        if (companion) records.push_back(std::move(*companion));
      }

      // Tie injection: the year gets an equal number of records from another
      // country, so the mode set becomes {true country, other}.
      if (rng.bernoulli(config.tie_injection_probability, id, sd::P_TIE, ys)) {
        std::string other = hosts[rng.hash(id, sd::P_TIE_COUNTRY, ys) % hosts.size()];
        if (other == country) other = other == de ? hosts.front() : de;
        for (int p = 0; p < pubs; ++p) {
          const std::uint64_t sub = ys * 100 + static_cast<std::uint64_t>(p);
          AuthorshipRecord rec;
          rec.record_id =
              "r-" + sd::pad5(i) + "-" + std::to_string(y) + "-t" + std::to_string(p);
          rec.author_id = r.author_id;
          rec.publication_id =
              "pub-" + sd::pad5(i) + "-" + std::to_string(y) + "-t" + std::to_string(p);
          rec.year = y;
          rec.author_full_name = r.full_name;
          const int drop = static_cast<int>(rng.hash(id, sd::P_COAUTHOR_DROP, sub + 7) % 4);
          for (int c = 0; c < 4; ++c) {
            if (c == drop) continue;
            rec.coauthor_names.push_back(sd::coauthor_name(i * 4 + c));
          }
          const std::string city =
              sd::city_name(other, static_cast<int>(rng.hash(id, sd::P_CITY, sub + 7) % 40));
          rec.affiliation.city = city;
          rec.affiliation.institution = "University of " + city;
          rec.affiliation.address_line = "2 " + city + " Street";
          rec.affiliation.country = other;
          rec.publication_title = sd::capitalize(sd::topic_word(r.topic, 1)) + " notes";
          rec.journal_title = "Journal of " + sd::topic_word(r.topic, 0) + " Research";
          rec.keywords.push_back(sd::topic_word(r.topic, 2));
          for (int t = 0; t < 3; ++t) {
            rec.subject_tags.push_back("tag-" + sd::pad5(i) + "-" + std::to_string(t));
          }
          rec.funding_texts.push_back("Funding Agency " + sd::pad5(i));
          rec.grant_numbers.push_back("GR-" + sd::pad5(i));
          r.record_ids.push_back(rec.record_id);
          truth.record_identity[rec.record_id] = r.identity_id;
          records.push_back(std::move(rec));
        }
      }
    }
    truth.researchers.push_back(std::move(r));
  }

  return {RecordStore::from_records(std::move(records)), std::move(truth)};
}

// Brute-force exposure ledger over true yearly countries: a literal per-year
// scan, written independently of the rates module so the two can be compared
// exactly. Semantics mirror accumulate_exposure: at-risk years only, all
// departures, first return only.
inline ExposureLedger oracle_rates(const GroundTruth& truth, const Cohort& cohort,
                                   int period_start, int period_end,
                                   const ExposureOptions& options = {}) {
  ExposureLedger ledger;
  ledger.cohort_label = cohort.label;
  ledger.period_start = period_start;
  ledger.period_end = period_end;
  const std::string de(countries::kGermany);

  for (const auto& r : truth.researchers) {
    if (r.first_pub_year < cohort.start_year || r.first_pub_year > cohort.end_year) continue;

    const int horizon = options.censor_at_last_pub
                            ? r.last_pub_year
                            : std::max(r.last_pub_year, options.window_end);
    const auto country_at = [&](int year) -> std::string {
      if (year <= r.last_pub_year) return r.yearly_country.at(year);
      return r.yearly_country.at(r.last_pub_year);
    };

    int departure_year = -1;
    int return_year = -1;
    for (int y = r.first_pub_year + 1; y <= horizon; ++y) {
      if (departure_year < 0 && country_at(y - 1) == de && country_at(y) != de) {
        departure_year = y;
      }
      if (departure_year > 0 && return_year < 0 && y > departure_year &&
          country_at(y - 1) != de && country_at(y) == de) {
        return_year = y;
      }
    }

    std::vector<std::string> gender_keys = {"all"};
    if (r.gender == kFemale || r.gender == kMale) gender_keys.push_back(r.gender);

    for (int y = r.first_pub_year; y <= horizon; ++y) {
      if (y < period_start || y > period_end) continue;
      const bool at_risk = y < horizon;
      if (country_at(y) == de) {
        ledger.total.person_years_in_germany += 1.0;
        if (at_risk) ledger.total.at_risk_person_years_in_germany += 1.0;
        for (const auto& g : gender_keys) {
          ledger.cells[{g, -1, -1}].person_years_in_germany += 1.0;
          ledger.cells[{g, y - r.first_pub_year + 1, -1}].person_years_in_germany += 1.0;
          if (at_risk) {
            ledger.cells[{g, -1, -1}].at_risk_person_years_in_germany += 1.0;
            ledger.cells[{g, y - r.first_pub_year + 1, -1}].at_risk_person_years_in_germany +=
                1.0;
          }
        }
      } else if (departure_year > 0 && y >= departure_year &&
                 (return_year < 0 || y < return_year)) {
        ledger.total.person_years_outside += 1.0;
        if (at_risk) ledger.total.at_risk_person_years_outside += 1.0;
        for (const auto& g : gender_keys) {
          ledger.cells[{g, -1, -1}].person_years_outside += 1.0;
          ledger.cells[{g, -1, y - departure_year + 1}].person_years_outside += 1.0;
          ledger.cells[{g, departure_year - r.first_pub_year, y - departure_year + 1}]
              .person_years_outside += 1.0;
          if (at_risk) {
            ledger.cells[{g, -1, -1}].at_risk_person_years_outside += 1.0;
            ledger.cells[{g, -1, y - departure_year + 1}].at_risk_person_years_outside += 1.0;
            ledger.cells[{g, departure_year - r.first_pub_year, y - departure_year + 1}]
                .at_risk_person_years_outside += 1.0;
          }
        }
      }
    }
    for (int y = r.first_pub_year + 1; y <= horizon; ++y) {
      if (y < period_start || y > period_end) continue;
      if (country_at(y - 1) == de && country_at(y) != de) {
        ledger.total.departures += 1;
        for (const auto& g : gender_keys) {
          ledger.cells[{g, -1, -1}].departures += 1;
          ledger.cells[{g, y - r.first_pub_year, -1}].departures += 1;
        }
      }
      if (y == return_year) {
        ledger.total.returns += 1;
        for (const auto& g : gender_keys) {
          ledger.cells[{g, -1, -1}].returns += 1;
          ledger.cells[{g, -1, y - departure_year}].returns += 1;
          ledger.cells[{g, departure_year - r.first_pub_year, y - departure_year}].returns += 1;
        }
      }
    }
  }
  return ledger;
}

struct PairwiseMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t true_positive = 0;
  std::int64_t false_positive = 0;
  std::int64_t false_negative = 0;
};

// Pairwise precision/recall over two labelings of the same items: a pair is
// positive when its items share a label.
inline PairwiseMetrics pairwise_metrics(const std::vector<std::string>& predicted,
                                        const std::vector<std::string>& actual) {
  if (predicted.size() != actual.size()) throw DataError("pairwise metrics: length mismatch");
  PairwiseMetrics m;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = i + 1; j < predicted.size(); ++j) {
      const bool pred_same = predicted[i] == predicted[j];
      const bool true_same = actual[i] == actual[j];
      if (pred_same && true_same) ++m.true_positive;
      if (pred_same && !true_same) ++m.false_positive;
      if (!pred_same && true_same) ++m.false_negative;
    }
  }
  const double tp = static_cast<double>(m.true_positive);
  m.precision = (m.true_positive + m.false_positive) == 0
                    ? 1.0
                    : tp / static_cast<double>(m.true_positive + m.false_positive);
  m.recall = (m.true_positive + m.false_negative) == 0
                 ? 1.0
                 : tp / static_cast<double>(m.true_positive + m.false_negative);
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

struct InferredArtifacts {
  const RevisedIdMap* revised = nullptr;
  const RecordStore* imputed_store = nullptr;
  const std::vector<MigrationEvent>* events = nullptr;  // keyed by revised id
  const std::map<std::string, int>* researcher_topics = nullptr;  // revised id -> topic
};

struct InferenceScores {
  // Disambiguation, over within-profile record pairs.
  PairwiseMetrics disambiguation_all;
  PairwiseMetrics disambiguation_contaminated;  // restricted to multi-identity profiles
  // Country imputation, over records whose country was hidden.
  double imputation_accuracy = -1.0;  // correct / imputed
  double imputation_coverage = -1.0;  // imputed / hidden
  // Migration events, matched on (identity, year, from, to).
  double event_precision = -1.0;
  double event_recall = -1.0;
  // Topic assignment up to the best topic permutation.
  double topic_accuracy = -1.0;
};

inline InferenceScores score_inference(const RecordStore& store, const GroundTruth& truth,
                                       const InferredArtifacts& inferred) {
  InferenceScores scores;

  if (inferred.revised) {
    PairwiseMetrics all{};
    PairwiseMetrics contaminated{};
    all.precision = all.recall = all.f1 = 1.0;
    contaminated.precision = contaminated.recall = contaminated.f1 = 1.0;
    std::int64_t all_tp = 0, all_fp = 0, all_fn = 0;
    std::int64_t con_tp = 0, con_fp = 0, con_fn = 0;
    for (const auto& [author_id, record_ids] : store.author_index()) {
      std::vector<std::string> predicted;
      std::vector<std::string> actual;
      std::set<std::string> identities;
      for (const auto& rid : record_ids) {
        predicted.push_back(inferred.revised->revised_of(rid));
        const auto it = truth.record_identity.find(rid);
        if (it == truth.record_identity.end()) {
          throw DataError("truth does not cover record " + rid);
        }
        actual.push_back(it->second);
        identities.insert(it->second);
      }
      const auto m = pairwise_metrics(predicted, actual);
      all_tp += m.true_positive;
      all_fp += m.false_positive;
      all_fn += m.false_negative;
      if (identities.size() > 1) {
        con_tp += m.true_positive;
        con_fp += m.false_positive;
        con_fn += m.false_negative;
      }
    }
    const auto finalize = [](std::int64_t tp, std::int64_t fp, std::int64_t fn) {
      PairwiseMetrics m;
      m.true_positive = tp;
      m.false_positive = fp;
      m.false_negative = fn;
      m.precision = (tp + fp) == 0 ? 1.0
                                   : static_cast<double>(tp) / static_cast<double>(tp + fp);
      m.recall = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
      m.f1 = (m.precision + m.recall) == 0.0
                 ? 0.0
                 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
      return m;
    };
    scores.disambiguation_all = finalize(all_tp, all_fp, all_fn);
    scores.disambiguation_contaminated = finalize(con_tp, con_fp, con_fn);
  }

  if (inferred.imputed_store) {
    std::int64_t imputed = 0, correct = 0;
    for (const auto& [rid, true_country] : truth.hidden_country) {
      const auto& rec = inferred.imputed_store->by_id(rid);
      if (rec.affiliation.country) {
        ++imputed;
        if (*rec.affiliation.country == true_country) ++correct;
      }
    }
    scores.imputation_coverage =
        truth.hidden_country.empty()
            ? 1.0
            : static_cast<double>(imputed) / static_cast<double>(truth.hidden_country.size());
    scores.imputation_accuracy =
        imputed == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(imputed);
  }

  if (inferred.events && inferred.revised) {
    // Map each revised id to the majority true identity of its records.
    std::map<std::string, std::map<std::string, std::size_t>> votes;
    for (const auto& r : store.records()) {
      votes[inferred.revised->revised_of(r.record_id)][truth.record_identity.at(r.record_id)]++;
    }
    std::map<std::string, std::string> revised_to_identity;
    for (const auto& [revised, tally] : votes) {
      std::string best;
      std::size_t best_count = 0;
      for (const auto& [identity, count] : tally) {
        if (count > best_count) {
          best = identity;
          best_count = count;
        }
      }
      revised_to_identity[revised] = best;
    }
    std::set<std::tuple<std::string, int, std::string, std::string>> inferred_set;
    for (const auto& e : *inferred.events) {
      inferred_set.insert({revised_to_identity.count(e.researcher_id)
                               ? revised_to_identity[e.researcher_id]
                               : e.researcher_id,
                           e.year, e.from_country, e.to_country});
    }
    std::set<std::tuple<std::string, int, std::string, std::string>> true_set;
    for (const auto& r : truth.researchers) {
      for (const auto& e : r.events) {
        true_set.insert({r.identity_id, e.year, e.from_country, e.to_country});
      }
    }
    std::int64_t matched = 0;
    for (const auto& e : inferred_set) matched += true_set.count(e) ? 1 : 0;
    scores.event_precision = inferred_set.empty()
                                 ? 1.0
                                 : static_cast<double>(matched) /
                                       static_cast<double>(inferred_set.size());
    scores.event_recall = true_set.empty() ? 1.0
                                           : static_cast<double>(matched) /
                                                 static_cast<double>(true_set.size());
  }

  if (inferred.researcher_topics && inferred.revised) {
    // Identity -> majority revised id, then confusion matrix and the best
    // bijective topic matching.
    std::map<std::string, std::map<std::string, std::size_t>> votes;
    for (const auto& r : store.records()) {
      votes[truth.record_identity.at(r.record_id)][inferred.revised->revised_of(r.record_id)]++;
    }
    int max_inferred_topic = 0;
    for (const auto& [revised, topic] : *inferred.researcher_topics) {
      max_inferred_topic = std::max(max_inferred_topic, topic);
    }
    const int k = std::max(truth.topic_count, max_inferred_topic + 1);
    std::vector<std::vector<double>> confusion(static_cast<std::size_t>(k),
                                               std::vector<double>(static_cast<std::size_t>(k), 0.0));
    std::int64_t scored = 0;
    for (const auto& r : truth.researchers) {
      const auto vote = votes.find(r.identity_id);
      if (vote == votes.end()) continue;
      std::string revised;
      std::size_t best = 0;
      for (const auto& [candidate, count] : vote->second) {
        if (count > best) {
          revised = candidate;
          best = count;
        }
      }
      const auto topic = inferred.researcher_topics->find(revised);
      if (topic == inferred.researcher_topics->end()) continue;
      confusion[static_cast<std::size_t>(r.topic)][static_cast<std::size_t>(topic->second)] +=
          1.0;
      ++scored;
    }
    if (scored > 0) {
      const auto matching = max_score_assignment(confusion);
      double agree = 0.0;
      for (std::size_t t = 0; t < confusion.size(); ++t) {
        agree += confusion[t][static_cast<std::size_t>(matching[t])];
      }
      scores.topic_accuracy = agree / static_cast<double>(scored);
    }
  }

  return scores;
}

inline void write_ground_truth(const GroundTruth& truth, std::ostream& os) {
  nlohmann::ordered_json meta;
  meta["type"] = "meta";
  meta["topic_count"] = truth.topic_count;
  nlohmann::ordered_json hidden = nlohmann::ordered_json::object();
  for (const auto& [rid, cc] : truth.hidden_country) hidden[rid] = cc;
  meta["hidden_country"] = std::move(hidden);
  os << meta.dump() << '\n';
  for (const auto& r : truth.researchers) {
    nlohmann::ordered_json j;
    j["type"] = "researcher";
    j["identity_id"] = r.identity_id;
    j["author_id"] = r.author_id;
    j["full_name"] = r.full_name;
    j["gender"] = r.gender;
    j["first_pub_year"] = r.first_pub_year;
    j["last_pub_year"] = r.last_pub_year;
    j["topic"] = r.topic;
    nlohmann::ordered_json yearly = nlohmann::ordered_json::object();
    for (const auto& [year, cc] : r.yearly_country) yearly[std::to_string(year)] = cc;
    j["yearly_country"] = std::move(yearly);
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const auto& e : r.events) {
      events.push_back({{"year", e.year}, {"from", e.from_country}, {"to", e.to_country}});
    }
    j["events"] = std::move(events);
    j["record_ids"] = r.record_ids;
    j["collab_de_linked"] = r.collab_de_linked;
    j["collab_total"] = r.collab_total;
    os << j.dump() << '\n';
  }
}

inline GroundTruth read_ground_truth(std::istream& is) {
  GroundTruth truth;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (j.at("type") == "meta") {
      truth.topic_count = j.at("topic_count").get<int>();
      for (const auto& [rid, cc] : j.at("hidden_country").items()) {
        truth.hidden_country[rid] = cc.get<std::string>();
      }
      continue;
    }
    TrueResearcher r;
    r.identity_id = j.at("identity_id").get<std::string>();
    r.author_id = j.at("author_id").get<std::string>();
    r.full_name = j.at("full_name").get<std::string>();
    r.gender = j.at("gender").get<std::string>();
    r.first_pub_year = j.at("first_pub_year").get<int>();
    r.last_pub_year = j.at("last_pub_year").get<int>();
    r.topic = j.at("topic").get<int>();
    for (const auto& [year, cc] : j.at("yearly_country").items()) {
      r.yearly_country[std::stoi(year)] = cc.get<std::string>();
    }
    for (const auto& e : j.at("events")) {
      r.events.push_back({r.identity_id, e.at("year").get<int>(),
                          e.at("from").get<std::string>(), e.at("to").get<std::string>()});
    }
    for (const auto& rid : j.at("record_ids")) r.record_ids.push_back(rid.get<std::string>());
    r.collab_de_linked = j.at("collab_de_linked").get<std::int64_t>();
    r.collab_total = j.at("collab_total").get<std::int64_t>();
    for (const auto& rid : r.record_ids) truth.record_identity[rid] = r.identity_id;
    truth.researchers.push_back(std::move(r));
  }
  return truth;
}

}  // namespace scholmig
