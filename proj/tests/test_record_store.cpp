#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "scholmig/record.hpp"
#include "scholmig/synth.hpp"
#include "test_helpers.hpp"

using namespace scholmig;
using testutil::make_record;
using testutil::record_jsonl_line;

TEST_CASE("three well-formed jsonl lines parse to three records") {
  std::string text;
  text += record_jsonl_line(make_record("r1", "a1", 2000, "Anna Schmidt")) + "\n";
  text += record_jsonl_line(make_record("r2", "a1", 2001, "Anna Schmidt")) + "\n";
  text += record_jsonl_line(make_record("r3", "a2", 2002, "Peter Weber")) + "\n";
  std::vector<Reject> rejects;
  const auto store = testutil::parse_jsonl(text, &rejects);
  CHECK(store.size() == 3);
  CHECK(rejects.empty());
  CHECK(store.records()[0].record_id == "r1");  // order preserved
  CHECK(store.records()[2].record_id == "r3");
}

TEST_CASE("rows outside the observation window are rejected, others kept") {
  std::string text;
  text += record_jsonl_line(make_record("r1", "a1", 1850, "Old Author")) + "\n";
  text += record_jsonl_line(make_record("r2", "a1", 2000, "Anna Schmidt")) + "\n";
  text += record_jsonl_line(make_record("r3", "a1", 2021, "Anna Schmidt")) + "\n";
  text += record_jsonl_line(make_record("r4", "a1", 1996, "Anna Schmidt")) + "\n";
  std::vector<Reject> rejects;
  const auto store = testutil::parse_jsonl(text, &rejects);
  CHECK(store.size() == 2);
  REQUIRE(rejects.size() == 2);
  CHECK(rejects[0].line == 1);
  CHECK(rejects[0].reason == "year out of window");
  CHECK(rejects[1].line == 3);
}

TEST_CASE("duplicate record ids reject the later row") {
  std::string text;
  text += record_jsonl_line(make_record("r1", "a1", 2000, "Anna Schmidt")) + "\n";
  auto dup = make_record("r1", "a2", 2001, "Peter Weber");
  text += record_jsonl_line(dup) + "\n";
  std::vector<Reject> rejects;
  const auto store = testutil::parse_jsonl(text, &rejects);
  CHECK(store.size() == 1);
  CHECK(store.records()[0].author_id == "a1");
  REQUIRE(rejects.size() == 1);
  CHECK(rejects[0].reason == "duplicate record_id");
}

TEST_CASE("validation rejects empty names, empty affiliations, bad countries") {
  auto no_name = make_record("r1", "a1", 2000, "x");
  no_name.author_full_name = "";
  auto no_aff = make_record("r2", "a1", 2000, "Anna Schmidt");
  no_aff.affiliation = {};
  no_aff.affiliation.country = "DE";
  auto bad_country = make_record("r3", "a1", 2000, "Anna Schmidt", "Atlantis");
  std::string text = record_jsonl_line(no_name) + "\n" + record_jsonl_line(no_aff) + "\n";
  // bad_country's validation happens before normalization can succeed
  {
    nlohmann::ordered_json j = record_to_json(make_record("r3", "a1", 2000, "Anna Schmidt"));
    j["affiliation"]["country"] = "Atlantis";
    text += j.dump() + "\n";
  }
  text += record_jsonl_line(make_record("r4", "a1", 2000, "Anna Schmidt")) + "\n";
  text += record_jsonl_line(make_record("r5", "a1", 2001, "Anna Schmidt")) + "\n";
  text += record_jsonl_line(make_record("r6", "a1", 2002, "Anna Schmidt")) + "\n";
  std::vector<Reject> rejects;
  const auto store = testutil::parse_jsonl(text, &rejects);
  CHECK(store.size() == 3);
  REQUIRE(rejects.size() == 3);
  CHECK(rejects[0].reason == "empty author_full_name");
  CHECK(rejects[1].reason == "empty affiliation");
  CHECK(rejects[2].reason.rfind("unrecognized country", 0) == 0);
}

TEST_CASE("country names are normalized to alpha-2 at parse time") {
  nlohmann::ordered_json j = record_to_json(make_record("r1", "a1", 2000, "Anna Schmidt"));
  j["affiliation"]["country"] = "Germany";
  nlohmann::ordered_json j2 = record_to_json(make_record("r2", "a1", 2000, "Anna Schmidt"));
  j2["affiliation"]["country"] = "united states";
  const auto store = testutil::parse_jsonl(j.dump() + "\n" + j2.dump() + "\n");
  REQUIRE(store.size() == 2);
  CHECK(store.records()[0].affiliation.country == "DE");
  CHECK(store.records()[1].affiliation.country == "US");
}

TEST_CASE("more than half rejected rows is a schema mismatch") {
  std::string text = "not json\n{}\n";
  text += record_jsonl_line(make_record("r1", "a1", 2000, "Anna Schmidt")) + "\n";
  std::istringstream is(text);
  CHECK_THROWS_AS(parse_records(is, RecordFormat::jsonl), DataError);
}

TEST_CASE("an unreadable stream is a fatal I/O error") {
  std::ifstream missing("/no/such/file/anywhere.jsonl");
  CHECK_THROWS_AS(parse_records(missing, RecordFormat::jsonl), IoError);
}

TEST_CASE("csv field escaping round-trips adversarial content") {
  DetRng rng(808);
  const std::string alphabet = "ab,\"; x0";
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> fields;
    const std::size_t n = 1 + rng.below(6);
    for (std::size_t f = 0; f < n; ++f) {
      std::string field;
      const std::size_t len = rng.below(12);
      for (std::size_t i = 0; i < len; ++i) {
        field.push_back(alphabet[rng.below(alphabet.size())]);
      }
      fields.push_back(std::move(field));
    }
    std::string line = csv::join_row(fields);
    line.pop_back();  // strip the trailing newline
    CHECK(csv::parse_line(line) == fields);
  }
}

TEST_CASE("csv variant parses and requires the exact header") {
  auto r = make_record("r1", "a1", 2000, "Schmidt, Anna");  // comma forces quoting
  r.coauthor_names = {"Peter Weber", "Lena Vogel"};
  r.keywords = {"networks", "models"};
  auto r2 = make_record("r2", "a2", 2001, "Jürgen Müller");  // multibyte name
  r2.publication_title = "The \"quoted\" study";
  auto store = RecordStore::from_records({r, r2});
  std::ostringstream os;
  serialize_records(store, os, RecordFormat::csv);

  std::istringstream is(os.str());
  const auto parsed = parse_records(is, RecordFormat::csv);
  CHECK(parsed.rejects.empty());
  REQUIRE(parsed.store.size() == 2);
  CHECK(parsed.store.records()[0] == r);
  CHECK(parsed.store.records()[1] == r2);

  std::istringstream bad("wrong,header\na,b\n");
  CHECK_THROWS_AS(parse_records(bad, RecordFormat::csv), DataError);
}

TEST_CASE("unknown keys and missing fields are rejected per row") {
  nlohmann::ordered_json j = record_to_json(make_record("r1", "a1", 2000, "Anna Schmidt"));
  j["surprise"] = 1;
  nlohmann::ordered_json j2 = record_to_json(make_record("r2", "a1", 2000, "Anna Schmidt"));
  j2.erase("keywords");
  std::string text = j.dump() + "\n" + j2.dump() + "\n";
  text += record_jsonl_line(make_record("r3", "a1", 2001, "Anna Schmidt")) + "\n";
  text += record_jsonl_line(make_record("r4", "a1", 2002, "Anna Schmidt")) + "\n";
  std::vector<Reject> rejects;
  const auto store = testutil::parse_jsonl(text, &rejects);
  CHECK(store.size() == 2);
  REQUIRE(rejects.size() == 2);
  CHECK(rejects[0].reason == "unexpected key: surprise");
  CHECK(rejects[1].reason == "missing or invalid field: keywords");
}

TEST_CASE("synthetic store round-trips through both formats") {
  GeneratorConfig config;
  config.researcher_count = 400;
  config.observed_years = 12;
  config.missing_country_probability = 0.04;
  config.coauthor_de_link_probability = 0.3;
  config.departure_hazard_female = {0.05};
  config.departure_hazard_male = {0.05};
  config.seed = 321;
  const auto [store, truth] = generate(config);
  REQUIRE(store.size() >= 10000);

  for (const auto format : {RecordFormat::jsonl, RecordFormat::csv}) {
    std::ostringstream os;
    serialize_records(store, os, format);
    std::istringstream is(os.str());
    const auto parsed = parse_records(is, format);
    CHECK(parsed.rejects.empty());
    CHECK(parsed.store == store);
  }
}

TEST_CASE("parsing is deterministic over identical bytes") {
  GeneratorConfig config;
  config.researcher_count = 30;
  config.seed = 5;
  const auto [store, truth] = generate(config);
  std::ostringstream os;
  serialize_records(store, os, RecordFormat::jsonl);
  const auto a = testutil::parse_jsonl(os.str());
  const auto b = testutil::parse_jsonl(os.str());
  CHECK(a == b);
}

TEST_CASE("author index sizes sum to the record count and ids resolve") {
  GeneratorConfig config;
  config.researcher_count = 50;
  config.seed = 17;
  config.departure_hazard_female = {0.1};
  config.departure_hazard_male = {0.1};
  const auto [store, truth] = generate(config);
  std::size_t indexed = 0;
  for (const auto& [author, ids] : store.author_index()) {
    indexed += ids.size();
    for (const auto& id : ids) CHECK(store.by_id(id).author_id == author);
  }
  CHECK(indexed == store.size());

  std::size_t year_indexed = 0;
  for (const auto& [key, ids] : store.year_index()) {
    year_indexed += ids.size();
    for (const auto& id : ids) CHECK(store.by_id(id).year == key.second);
  }
  CHECK(year_indexed == store.size());
}

TEST_CASE("missing-country ids partition the store with the with-country rest") {
  SECTION("no missing countries") {
    const auto store = RecordStore::from_records(
        {make_record("r1", "a1", 2000, "Anna Schmidt"), make_record("r2", "a1", 2001, "Anna Schmidt")});
    CHECK(missing_country_records(store).empty());
  }
  SECTION("exactly 5 of 100 records lack a country") {
    std::vector<AuthorshipRecord> records;
    std::vector<std::string> expected;
    for (int i = 0; i < 100; ++i) {
      auto r = make_record("r" + std::to_string(i), "a" + std::to_string(i % 10),
                           1996 + i % 20, "Anna Schmidt");
      if (i % 20 == 0) {  // 5 of 100
        r.affiliation.country = std::nullopt;
        expected.push_back(r.record_id);
      }
      records.push_back(std::move(r));
    }
    const auto store = RecordStore::from_records(std::move(records));
    const auto missing = missing_country_records(store);
    CHECK(missing == expected);
    CHECK(static_cast<double>(missing.size()) / static_cast<double>(store.size()) == 0.05);
    std::size_t with_country = 0;
    for (const auto& r : store.records()) with_country += r.affiliation.country ? 1 : 0;
    CHECK(with_country + missing.size() == store.size());
  }
  SECTION("generator bookkeeping matches the missing list exactly") {
    GeneratorConfig config;
    config.researcher_count = 100;
    config.missing_country_probability = 0.05;
    config.seed = 99;
    const auto [store, truth] = generate(config);
    const auto missing = missing_country_records(store);
    CHECK(missing.size() == truth.hidden_country.size());
    for (const auto& id : missing) CHECK(truth.hidden_country.count(id) == 1);
  }
}
