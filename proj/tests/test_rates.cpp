#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "scholmig/rates.hpp"
#include "scholmig/rng.hpp"
#include "scholmig/synth.hpp"
#include "test_helpers.hpp"

using namespace scholmig;
using testutil::make_record;

namespace {

ResearcherTimeline tl_of(const std::string& id, int first_year,
                         const std::vector<std::string>& series) {
  std::vector<AuthorshipRecord> storage;
  int year = first_year;
  for (const auto& c : series) {
    storage.push_back(make_record(id + "-" + std::to_string(year), id, year, "Anna Schmidt", c));
    ++year;
  }
  std::vector<const AuthorshipRecord*> records;
  for (const auto& r : storage) records.push_back(&r);
  auto tl = build_timeline(id, records);
  REQUIRE(tl.has_value());
  return *tl;
}

}  // namespace

TEST_CASE("cohort assignment uses inclusive year ranges") {
  REQUIRE(assign_cohort(1999).has_value());
  CHECK(assign_cohort(1999)->label == "1998-2001");
  CHECK_FALSE(assign_cohort(1997).has_value());
  REQUIRE(assign_cohort(2009).has_value());
  CHECK(assign_cohort(2009)->label == "2006-2009");
  CHECK_FALSE(assign_cohort(2010).has_value());
}

TEST_CASE("exposure: a non-mover contributes one person-year per observed year") {
  const auto tl = tl_of("p1", 1998, {"DE", "DE", "DE", "DE"});
  const std::vector<AnalysisResearcher> researchers = {{&tl, kFemale}};
  const auto ledger =
      accumulate_exposure(researchers, {"1998-2001", 1998, 2001}, 1996, 2020);
  CHECK(ledger.total.person_years_in_germany == 4.0);
  CHECK(ledger.total.at_risk_person_years_in_germany == 3.0);
  CHECK(ledger.total.person_years_outside == 0.0);
  CHECK(ledger.total.departures == 0);
  CHECK(ledger.total.returns == 0);
}

TEST_CASE("exposure matches the hand-traced departure/return example") {
  // 5-year window: DE DE US US DE -> two pre-departure years, two abroad,
  // one post-return remainder.
  const auto tl = tl_of("p1", 1998, {"DE", "DE", "US", "US", "DE"});
  const std::vector<AnalysisResearcher> researchers = {{&tl, kMale}};
  const auto ledger =
      accumulate_exposure(researchers, {"1998-2001", 1998, 2001}, 1996, 2020);
  CHECK(ledger.total.person_years_in_germany == 3.0);
  CHECK(ledger.total.person_years_outside == 2.0);
  CHECK(ledger.total.departures == 1);
  CHECK(ledger.total.returns == 1);
  // departure at 2000 = academic age 2; return at 2002 = two years after
  CHECK(ledger.cells.at({kMale, 2, -1}).departures == 1);
  CHECK(ledger.cells.at({kMale, 2, 2}).returns == 1);
  CHECK(ledger.cells.at({kMale, 2, 1}).person_years_outside == 1.0);
  CHECK(ledger.cells.at({kMale, 2, 2}).person_years_outside == 1.0);
  // gender rows mirror into the "all" aggregate
  CHECK(ledger.cells.at({"all", -1, -1}).departures == 1);
}

TEST_CASE("unknown-gender researchers appear in totals but not in gender rows") {
  const auto tl = tl_of("p1", 1998, {"DE", "US", "US"});
  const std::vector<AnalysisResearcher> researchers = {{&tl, kUnknownGender}};
  const auto ledger =
      accumulate_exposure(researchers, {"1998-2001", 1998, 2001}, 1996, 2020);
  CHECK(ledger.total.departures == 1);
  CHECK(ledger.cells.count({kFemale, -1, -1}) == 0);
  CHECK(ledger.cells.count({kMale, -1, -1}) == 0);
  CHECK(ledger.cells.at({"all", -1, -1}).departures == 1);
}

TEST_CASE("ledger equals the brute-force oracle on a synthetic population") {
  GeneratorConfig config;
  config.researcher_count = 300;
  config.first_pub_year_min = 1998;
  config.first_pub_year_max = 2001;
  config.observed_years = 12;
  config.departure_hazard_female = {0.04};
  config.departure_hazard_male = {0.03};
  config.return_hazard = {0.2};
  config.coauthor_de_link_probability = 0.2;
  config.seed = 2023;
  const auto [store, truth] = generate(config);

  const auto revised = identity_id_map(store);
  const auto timelines = build_timelines(store, revised);
  std::map<std::string, std::string> gender_of;
  for (const auto& r : truth.researchers) gender_of[r.author_id] = r.gender;
  std::vector<AnalysisResearcher> researchers;
  for (const auto& [author, tl] : timelines.by_researcher) {
    researchers.push_back({&tl, gender_of.at(author)});
  }

  for (const auto censor : {true, false}) {
    const ExposureOptions options{censor, 2020};
    const auto pipeline_ledger = accumulate_exposure(researchers, canonical_cohorts()[0], 1996,
                                                     2020, options);
    const auto oracle_ledger = oracle_rates(truth, canonical_cohorts()[0], 1996, 2020, options);
    CHECK(pipeline_ledger == oracle_ledger);
  }

  SECTION("narrow reporting periods agree too") {
    for (const auto& [p0, p1] : std::vector<std::pair<int, int>>{
             {1999, 2003}, {2002, 2002}, {2005, 2012}}) {
      const auto pipeline_ledger =
          accumulate_exposure(researchers, canonical_cohorts()[0], p0, p1);
      const auto oracle_ledger = oracle_rates(truth, canonical_cohorts()[0], p0, p1);
      CHECK(pipeline_ledger == oracle_ledger);
    }
  }
}

TEST_CASE("departure and return rates are exact quotients") {
  ExposureCell cell;
  cell.person_years_in_germany = 1000.0;
  cell.departures = 8;
  const auto rate = departure_rate(cell);
  CHECK(rate.rate_per_1000 == 8.0);
  CHECK(rate.rate_per_1000 * rate.person_years / 1000.0 == static_cast<double>(rate.events));

  cell.departures = 0;
  CHECK(departure_rate(cell).rate_per_1000 == 0.0);

  ExposureCell abroad;
  abroad.person_years_outside = 250.0;
  abroad.returns = 20;
  CHECK(return_rate(abroad).rate_per_1000 == 80.0);
  abroad.returns = 0;
  CHECK(return_rate(abroad).rate_per_1000 == 0.0);

  SECTION("zero exposure is an explicit error, never a silent 0/0") {
    ExposureCell empty;
    CHECK_THROWS_AS(departure_rate(empty), DataError);
    CHECK_THROWS_AS(return_rate(empty), DataError);
  }
}

TEST_CASE("rate identity holds on synthetic ledgers") {
  GeneratorConfig config;
  config.researcher_count = 150;
  config.first_pub_year_min = 1998;
  config.first_pub_year_max = 2001;
  config.departure_hazard_female = {0.05};
  config.departure_hazard_male = {0.05};
  config.seed = 5150;
  const auto [store, truth] = generate(config);
  const auto ledger = oracle_rates(truth, canonical_cohorts()[0], 1996, 2020);
  for (const auto& [key, cell] : ledger.cells) {
    if (cell.person_years_in_germany > 0) {
      const auto r = departure_rate(cell);
      CHECK(std::abs(r.rate_per_1000 * r.person_years / 1000.0 -
                     static_cast<double>(r.events)) < 1e-12);
    }
    if (cell.person_years_outside > 0) {
      const auto r = return_rate(cell);
      CHECK(std::abs(r.rate_per_1000 * r.person_years / 1000.0 -
                     static_cast<double>(r.events)) < 1e-12);
    }
  }
}

TEST_CASE("shifting all years and cohort definitions leaves rates unchanged") {
  const std::vector<std::vector<std::string>> series = {
      {"DE", "DE", "US", "US", "DE", "DE"},
      {"DE", "DE", "DE", "DE", "DE", "DE"},
      {"DE", "US", "US", "GB", "DE", "US"},
  };
  const int shift = 3;
  std::vector<ResearcherTimeline> base, shifted;
  for (std::size_t i = 0; i < series.size(); ++i) {
    base.push_back(tl_of("p" + std::to_string(i), 1998, series[i]));
    shifted.push_back(tl_of("p" + std::to_string(i), 1998 + shift, series[i]));
  }
  std::vector<AnalysisResearcher> base_r, shifted_r;
  for (std::size_t i = 0; i < series.size(); ++i) {
    base_r.push_back({&base[i], kFemale});
    shifted_r.push_back({&shifted[i], kFemale});
  }
  const auto ledger_a = accumulate_exposure(base_r, {"c", 1998, 1999}, 1996, 2020);
  const auto ledger_b =
      accumulate_exposure(shifted_r, {"c", 1998 + shift, 1999 + shift}, 1996 + shift,
                          2020);
  CHECK(ledger_a.total == ledger_b.total);
  CHECK(ledger_a.cells == ledger_b.cells);
}

TEST_CASE("country return share counts first hosts and eventual returns") {
  const auto tl1 = tl_of("p1", 1998, {"DE", "US", "US", "DE"});  // US host, returned
  const auto tl2 = tl_of("p2", 1998, {"DE", "US", "US", "US"});  // US host, stayed
  const auto tl3 = tl_of("p3", 1998, {"DE", "GB", "GB", "DE"});  // GB host, returned
  const std::vector<const ResearcherTimeline*> timelines = {&tl1, &tl2, &tl3};
  CHECK(country_return_share(timelines, "US") == 0.5);
  CHECK(country_return_share(timelines, "GB") == 1.0);
  CHECK_THROWS_AS(country_return_share(timelines, "FR"), DataError);
}

TEST_CASE("collaborative ratio counts German-linked abroad publications") {
  // p1 abroad in 2000-2003 with 4 publications; two of them share a
  // publication id with a German-affiliated coauthor record.
  std::vector<AuthorshipRecord> records;
  records.push_back(make_record("r0", "p1", 1998, "Anna Schmidt", "DE"));
  records.push_back(make_record("r1", "p1", 1999, "Anna Schmidt", "DE"));
  for (int i = 0; i < 4; ++i) {
    auto r = make_record("r" + std::to_string(2 + i), "p1", 2000 + i, "Anna Schmidt", "US");
    records.push_back(std::move(r));
  }
  for (int i = 0; i < 2; ++i) {
    auto coauthor = make_record("cx" + std::to_string(i), "q1", 2000 + i, "Peter Weber", "DE");
    coauthor.publication_id = records[static_cast<std::size_t>(2 + i)].publication_id;
    records.push_back(std::move(coauthor));
  }
  const auto store = RecordStore::from_records(std::move(records));
  const auto revised = identity_id_map(store);
  const auto timelines = build_timelines(store, revised);
  const auto index = PublicationCountryIndex::build(store);

  const auto own = store.records_of_author("p1");
  const auto cr = collaborative_ratio(timelines.by_researcher.at("p1"), own, index);
  CHECK(cr.total == 4);
  CHECK(cr.de_linked == 2);
  CHECK(cr.ratio == 0.5);

  SECTION("all abroad publications linked scores 1") {
    std::vector<AuthorshipRecord> linked;
    linked.push_back(make_record("a0", "p2", 1998, "Lena Vogel", "DE"));
    auto abroad = make_record("a1", "p2", 1999, "Lena Vogel", "US");
    auto buddy = make_record("a2", "q2", 1999, "Hans Koch", "DE");
    buddy.publication_id = abroad.publication_id;
    linked.push_back(std::move(abroad));
    linked.push_back(std::move(buddy));
    const auto store2 = RecordStore::from_records(std::move(linked));
    const auto tls = build_timelines(store2, identity_id_map(store2));
    const auto cr2 = collaborative_ratio(tls.by_researcher.at("p2"),
                                         store2.records_of_author("p2"),
                                         PublicationCountryIndex::build(store2));
    CHECK(cr2.ratio == 1.0);
  }

  SECTION("no abroad publications is an error") {
    const auto stay = RecordStore::from_records(
        {make_record("s0", "p3", 1998, "Max Braun", "DE"),
         make_record("s1", "p3", 1999, "Max Braun", "DE")});
    const auto tls = build_timelines(stay, identity_id_map(stay));
    CHECK_THROWS_AS(collaborative_ratio(tls.by_researcher.at("p3"),
                                        stay.records_of_author("p3"),
                                        PublicationCountryIndex::build(stay)),
                    DataError);
  }
}

TEST_CASE("collaborative ratio matches a brute-force recount on synthetic data") {
  GeneratorConfig config;
  config.researcher_count = 120;
  config.departure_hazard_female = {0.08};
  config.departure_hazard_male = {0.08};
  config.return_hazard = {0.15};
  config.coauthor_de_link_probability = 0.4;
  config.observed_years = 12;
  config.seed = 31415;
  const auto [store, truth] = generate(config);
  const auto timelines = build_timelines(store, identity_id_map(store));
  const auto index = PublicationCountryIndex::build(store);

  std::size_t checked = 0;
  for (const auto& r : truth.researchers) {
    if (r.collab_total == 0) continue;
    const auto tl = timelines.by_researcher.find(r.author_id);
    REQUIRE(tl != timelines.by_researcher.end());
    const auto cr = collaborative_ratio(tl->second, store.records_of_author(r.author_id), index);
    CHECK(cr.total == r.collab_total);
    CHECK(cr.de_linked == r.collab_de_linked);
    CHECK(cr.ratio >= 0.0);
    CHECK(cr.ratio <= 1.0);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("pearson correlation: closed forms, hand-computed value, invariances") {
  CHECK(pearson({1, 2, 3, 4}, {3, 5, 7, 9}) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(pearson({1, 2, 3, 4}, {-1, -2, -3, -4}) == Catch::Approx(-1.0).epsilon(1e-12));

  // xs = 1..5, ys = {2,4,5,4,5}: r = 6 / sqrt(10*6) = sqrt(0.6)
  const std::vector<double> xs = {1, 2, 3, 4, 5};
  const std::vector<double> ys = {2, 4, 5, 4, 5};
  CHECK(std::abs(pearson(xs, ys) - std::sqrt(0.6)) < 1e-12);

  SECTION("affine invariance") {
    DetRng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x, y;
      for (int i = 0; i < 30; ++i) {
        x.push_back(rng.uniform(-5, 5));
        y.push_back(rng.uniform(-5, 5));
      }
      const double base = pearson(x, y);
      const double a = rng.uniform(0.1, 4.0);
      const double b = rng.uniform(-10, 10);
      std::vector<double> scaled;
      for (const double v : x) scaled.push_back(a * v + b);
      CHECK(pearson(scaled, y) == Catch::Approx(base).margin(1e-12));
      std::vector<double> flipped;
      for (const double v : x) flipped.push_back(-a * v + b);
      CHECK(pearson(flipped, y) == Catch::Approx(-base).margin(1e-12));
    }
  }

  SECTION("degenerate inputs are errors") {
    CHECK_THROWS_AS(pearson({1.0}, {2.0}), DataError);
    CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), DataError);
    CHECK_THROWS_AS(pearson({2, 2, 2}, {1, 2, 3}), DataError);
  }
}
