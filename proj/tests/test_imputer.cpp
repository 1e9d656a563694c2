#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "scholmig/imputer.hpp"
#include "scholmig/rng.hpp"
#include "scholmig/synth.hpp"
#include "test_helpers.hpp"

using namespace scholmig;

namespace {

Affiliation aff(std::string institution, std::string city = "", std::string address = "") {
  Affiliation a;
  a.institution = std::move(institution);
  a.city = std::move(city);
  a.address_line = std::move(address);
  return a;
}

// Separable two-country corpus: disjoint city vocabularies.
std::vector<std::pair<Affiliation, std::string>> separable_rows(int per_country) {
  std::vector<std::pair<Affiliation, std::string>> rows;
  DetRng rng(2024);
  for (int i = 0; i < per_country; ++i) {
    const std::string de_city = "dehaven" + std::to_string(rng.uniform_int(0, 9));
    rows.emplace_back(aff("university of " + de_city, de_city), "DE");
    const std::string us_city = "usfield" + std::to_string(rng.uniform_int(0, 9));
    rows.emplace_back(aff("university of " + us_city, us_city), "US");
  }
  return rows;
}

}  // namespace

TEST_CASE("single-document vocabulary has idf 1 for every token") {
  const auto vocab = build_vocabulary({aff("Max Planck Institute", "Rostock")}, 1);
  REQUIRE(vocab.size() == 4);
  const std::set<std::string> tokens(vocab.tokens.begin(), vocab.tokens.end());
  CHECK(tokens == std::set<std::string>{"max", "planck", "institute", "rostock"});
  for (const double idf : vocab.idf) CHECK(idf == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vocabulary construction rejects empty input") {
  CHECK_THROWS_AS(build_vocabulary({}, 1), DataError);
  CHECK_THROWS_AS(build_vocabulary({aff("x")}, 0), DataError);
}

TEST_CASE("shared tokens get lower idf than unique tokens") {
  const auto vocab = build_vocabulary(
      {aff("Berlin Institute"), aff("Hamburg Institute")}, 1);
  const auto idf_of = [&](const std::string& t) { return vocab.idf[static_cast<std::size_t>(vocab.index.at(t))]; };
  CHECK(idf_of("institute") < idf_of("berlin"));
  CHECK(idf_of("institute") < idf_of("hamburg"));
}

TEST_CASE("vocabulary document frequencies match a brute-force recount") {
  GeneratorConfig config;
  config.researcher_count = 80;
  config.seed = 88;
  const auto [store, truth] = generate(config);
  std::vector<Affiliation> affiliations;
  for (const auto& r : store.records()) {
    affiliations.push_back(r.affiliation);
    if (affiliations.size() == 1000) break;
  }
  REQUIRE(affiliations.size() == 1000);

  const int min_df = 2;
  const auto vocab = build_vocabulary(affiliations, min_df);

  // independent recount
  std::map<std::string, int> df;
  for (const auto& a : affiliations) {
    std::set<std::string> seen;
    for (const auto& t : text::tokenize(a.text())) seen.insert(t);
    for (const auto& t : seen) ++df[t];
  }
  std::size_t expected_size = 0;
  for (const auto& [token, count] : df) {
    if (count < min_df) {
      CHECK(vocab.index.count(token) == 0);
      continue;
    }
    ++expected_size;
    REQUIRE(vocab.index.count(token) == 1);
    const double expected_idf = std::log(1001.0 / (1.0 + count)) + 1.0;
    CHECK(vocab.idf[static_cast<std::size_t>(vocab.index.at(token))] ==
          Catch::Approx(expected_idf).epsilon(1e-12));
  }
  CHECK(vocab.size() == expected_size);
}

TEST_CASE("vectorize: zero vector, unit vector, duplication invariance") {
  const auto vocab = build_vocabulary({aff("berlin institute"), aff("berlin lab")}, 1);
  CHECK(vectorize(aff("tokyo"), vocab).empty());

  const auto unit = vectorize(aff("berlin"), vocab);
  REQUIRE(unit.entries.size() == 1);
  CHECK(unit.entries[0].second == Catch::Approx(1.0).epsilon(1e-12));

  const auto once = vectorize(aff("berlin institute"), vocab);
  const auto twice = vectorize(aff("berlin institute berlin institute"), vocab);
  REQUIRE(once.entries.size() == twice.entries.size());
  for (std::size_t i = 0; i < once.entries.size(); ++i) {
    CHECK(once.entries[i].first == twice.entries[i].first);
    CHECK(once.entries[i].second == Catch::Approx(twice.entries[i].second).epsilon(1e-12));
  }
  CHECK(once.squared_norm() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("training on separable countries reaches perfect held-out accuracy") {
  const auto rows = separable_rows(100);  // 200 rows
  ImputerOptions options;
  options.min_df = 1;
  options.hidden_units = 32;
  options.epochs = 40;
  const auto result = train_country_model(rows, 0.8, 7, options);
  CHECK(result.held_out_accuracy == 1.0);

  // every training row classifies to its own label
  for (const auto& [affiliation, country] : rows) {
    const auto [predicted, confidence] = predict_country(result.model, affiliation);
    CHECK(predicted == country);
    CHECK(confidence > 0.5);
  }
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto rows = separable_rows(40);
  ImputerOptions options;
  options.min_df = 1;
  options.hidden_units = 16;
  options.epochs = 5;
  const auto a = train_country_model(rows, 0.8, 99, options);
  const auto b = train_country_model(rows, 0.8, 99, options);
  CHECK(a.held_out_accuracy == b.held_out_accuracy);
  CHECK(a.model == b.model);

  std::ostringstream sa, sb;
  save_country_model(a.model, sa);
  save_country_model(b.model, sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("single-class input is a degenerate label set") {
  std::vector<std::pair<Affiliation, std::string>> rows;
  for (int i = 0; i < 10; ++i) rows.emplace_back(aff("city" + std::to_string(i)), "DE");
  CHECK_THROWS_WITH(train_country_model(rows, 0.8, 1),
                    Catch::Matchers::ContainsSubstring("degenerate label set"));
}

TEST_CASE("predicting an empty affiliation yields the unknown sentinel") {
  const auto rows = separable_rows(20);
  ImputerOptions options;
  options.min_df = 1;
  options.hidden_units = 8;
  options.epochs = 2;
  const auto result = train_country_model(rows, 0.8, 3, options);
  const auto [code, confidence] = predict_country(result.model, aff(""));
  CHECK(code == kUnknownCountry);
  CHECK(confidence == 0.0);
}

TEST_CASE("class probabilities sum to one for random inputs") {
  auto net = FeedForwardNet::initialized(10, 7, 5, 42);
  DetRng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    SparseVec x;
    for (int j = 0; j < 10; ++j) {
      if (rng.bernoulli(0.4)) x.entries.emplace_back(j, rng.uniform(-1, 1));
    }
    const auto probs = net.forward(x);
    double sum = 0.0;
    for (const double p : probs) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("imputation fills only missing countries and respects the floor") {
  const auto rows = separable_rows(150);
  ImputerOptions options;
  options.min_df = 1;
  options.hidden_units = 16;
  options.epochs = 60;
  const auto trained = train_country_model(rows, 0.8, 11, options);

  SECTION("store with no missing countries is unchanged") {
    const auto store = RecordStore::from_records(
        {testutil::make_record("r1", "a1", 2000, "Anna Schmidt", "DE", "dehaven1")});
    const auto result = impute_missing_countries(store, trained.model, 0.5);
    CHECK(result.report.empty());
    CHECK(result.store == store);
  }

  SECTION("missing countries are recovered from separable text") {
    std::vector<AuthorshipRecord> records;
    std::map<std::string, std::string> hidden;
    DetRng rng(5);
    for (int i = 0; i < 60; ++i) {
      const bool de = i % 2 == 0;
      const std::string city = (de ? "dehaven" : "usfield") + std::to_string(rng.uniform_int(0, 9));
      auto r = testutil::make_record("r" + std::to_string(i), "a" + std::to_string(i), 2000,
                                     "Anna Schmidt", "", city);
      r.affiliation.institution = "university of " + city;
      r.affiliation.country = std::nullopt;
      hidden[r.record_id] = de ? "DE" : "US";
      records.push_back(std::move(r));
    }
    const auto store = RecordStore::from_records(std::move(records));
    const auto result = impute_missing_countries(store, trained.model, 0.5);
    CHECK(result.report.size() == 60);
    std::size_t correct = 0, applied = 0;
    for (const auto& item : result.report) {
      if (!item.applied) continue;
      ++applied;
      if (item.predicted == hidden[item.record_id]) ++correct;
    }
    REQUIRE(applied > 0);
    CHECK(static_cast<double>(correct) / static_cast<double>(applied) >= 0.95);
    // never overwrites: imputed store still agrees wherever input had a country
    for (const auto& r : store.records()) {
      if (r.affiliation.country) {
        CHECK(result.store.by_id(r.record_id).affiliation.country == r.affiliation.country);
      }
    }
  }

  SECTION("a record below the floor stays missing and is flagged") {
    auto r = testutil::make_record("r1", "a1", 2000, "Anna Schmidt", "", "dehaven1");
    r.affiliation.country = std::nullopt;
    const auto store = RecordStore::from_records({r});
    const auto result = impute_missing_countries(store, trained.model, 1.1);  // unreachable floor
    REQUIRE(result.report.size() == 1);
    CHECK_FALSE(result.report[0].applied);
    CHECK_FALSE(result.store.records()[0].affiliation.country.has_value());
  }
}

TEST_CASE("analytic gradients match central finite differences on a toy network") {
  // 10 parameters: 3 inputs, 1 hidden unit, 3 classes.
  auto net = FeedForwardNet::initialized(3, 1, 3, 12345);
  REQUIRE(net.parameter_count() == 10);
  SparseVec x1, x2, x3;
  x1.entries = {{0, 0.7}, {2, -0.3}};
  x2.entries = {{1, 1.1}};
  x3.entries = {{0, -0.4}, {1, 0.2}, {2, 0.9}};
  const std::vector<std::pair<const SparseVec*, int>> batch = {{&x1, 0}, {&x2, 2}, {&x3, 1}};
  CHECK(gradient_check(net, batch) < 1e-4);
}

TEST_CASE("model serialization round-trips bit-exactly") {
  const auto rows = separable_rows(30);
  ImputerOptions options;
  options.min_df = 1;
  options.hidden_units = 16;
  options.epochs = 3;
  const auto trained = train_country_model(rows, 0.75, 654, options);
  std::ostringstream os(std::ios::binary);
  save_country_model(trained.model, os);
  std::istringstream is(os.str());
  const auto loaded = load_country_model(is);
  CHECK(loaded == trained.model);
  std::ostringstream os2(std::ios::binary);
  save_country_model(loaded, os2);
  CHECK(os.str() == os2.str());
}
