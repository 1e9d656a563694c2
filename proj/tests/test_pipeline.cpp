#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "scholmig/pipeline.hpp"
#include "scholmig/synth.hpp"
#include "test_helpers.hpp"

using namespace scholmig;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("scholmig_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string gender_table_path() { return std::string(SCHOLMIG_DATA_DIR) + "/name_gender.csv"; }

std::string write_synth_store(const fs::path& dir, const GeneratorConfig& config) {
  const auto [store, truth] = generate(config);
  const auto path = (dir / "records.jsonl").string();
  std::ofstream os(path, std::ios::binary);
  serialize_records(store, os, RecordFormat::jsonl);
  return path;
}

std::map<std::string, std::string> base_config_map(const std::string& input,
                                                   const std::string& output_dir) {
  return {
      {"input.path", input},
      {"input.format", "jsonl"},
      {"output.dir", output_dir},
      {"seed", "91"},
      {"gender.table_path", gender_table_path()},
      {"imputer.epochs", "5"},
      {"imputer.hidden_units", "32"},
      {"imputer.min_df", "1"},
      {"lda.k", "3"},
      {"lda.alpha", "0.2"},
      {"lda.iterations", "80"},
      {"lda.collocation_min_count", "8"},
      {"rates.cohorts", "1998-2001;2002-2005"},
      {"report.evaluation_year", "2020"},
  };
}

std::vector<std::vector<std::string>> parse_csv_file(const std::string& content) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(content);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty()) rows.push_back(csv::parse_line(line));
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing validates keys, seed, and value shapes") {
  auto map = base_config_map("in.jsonl", "out");
  const auto config = pipeline_config_from_map(map);
  CHECK(config.seed == 91);
  CHECK(config.cohorts.size() == 2);
  CHECK(config.cohorts[0].start_year == 1998);
  CHECK(config.cohorts[1].end_year == 2005);

  SECTION("unknown key") {
    map["mystery.knob"] = "1";
    CHECK_THROWS_AS(pipeline_config_from_map(map), DataError);
  }
  SECTION("missing seed") {
    map.erase("seed");
    CHECK_THROWS_AS(pipeline_config_from_map(map), DataError);
  }
  SECTION("missing input path") {
    map.erase("input.path");
    CHECK_THROWS_AS(pipeline_config_from_map(map), DataError);
  }
  SECTION("key-value file round trip") {
    std::istringstream is("# comment\nseed = 7\ninput.path=x.jsonl\n\nlda.k=4\n");
    const auto parsed = read_config_map(is);
    CHECK(parsed.at("seed") == "7");
    CHECK(parsed.at("lda.k") == "4");
    CHECK(parsed.size() == 3);
  }
}

TEST_CASE("all-non-mover input yields a pyramid without outward or returnee rows") {
  TempDir tmp("nonmover");
  GeneratorConfig gen;
  gen.researcher_count = 40;
  gen.departure_hazard_female = {0.0};
  gen.departure_hazard_male = {0.0};
  gen.first_pub_year_min = 1998;
  gen.first_pub_year_max = 2001;
  gen.seed = 10;
  const auto input = write_synth_store(tmp.path, gen);
  const auto config = pipeline_config_from_map(base_config_map(input, ""));
  const auto result = run_pipeline(config);

  const auto rows = parse_csv_file(result.bundle.files.at("pyramid.csv"));
  REQUIRE(rows.size() > 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == "non_mover");
  }
  CHECK(result.events.empty());
}

TEST_CASE("pipeline rerun with the same seed is byte-identical") {
  TempDir tmp("rerun");
  GeneratorConfig gen;
  gen.researcher_count = 60;
  gen.departure_hazard_female = {0.05};
  gen.departure_hazard_male = {0.04};
  gen.missing_country_probability = 0.04;
  gen.first_pub_year_min = 1998;
  gen.first_pub_year_max = 2005;
  gen.coauthor_de_link_probability = 0.3;
  gen.seed = 20;
  const auto input = write_synth_store(tmp.path, gen);

  auto map = base_config_map(input, (tmp.path / "out_a").string());
  const auto result_a = run_pipeline(pipeline_config_from_map(map));
  map["output.dir"] = (tmp.path / "out_b").string();
  const auto result_b = run_pipeline(pipeline_config_from_map(map));

  // manifests differ only through output.dir, which is part of the config dump
  auto files_a = result_a.bundle.files;
  auto files_b = result_b.bundle.files;
  files_a.erase("manifest.json");
  files_b.erase("manifest.json");
  CHECK(files_a == files_b);

  for (const auto& [name, bytes] : files_a) {
    std::ifstream is(tmp.path / "out_a" / name, std::ios::binary);
    std::stringstream buffer;
    buffer << is.rdbuf();
    CHECK(buffer.str() == bytes);
  }
}

TEST_CASE("emitted aggregates equal direct module recomputation") {
  TempDir tmp("recompute");
  GeneratorConfig gen;
  gen.researcher_count = 80;
  gen.departure_hazard_female = {0.06};
  gen.departure_hazard_male = {0.05};
  gen.return_hazard = {0.2};
  gen.first_pub_year_min = 1998;
  gen.first_pub_year_max = 2005;
  gen.coauthor_de_link_probability = 0.4;
  gen.seed = 30;
  const auto input = write_synth_store(tmp.path, gen);
  const auto config = pipeline_config_from_map(base_config_map(input, ""));
  const auto result = run_pipeline(config);

  SECTION("pyramid counts equal a classify tally") {
    std::map<std::tuple<std::string, std::string, int>, std::int64_t> expected;
    for (const auto& [researcher, tl] : result.timelines.by_researcher) {
      if (config.evaluation_year < tl.first_pub_year) continue;
      const auto category = classify(tl, config.evaluation_year);
      if (!category) continue;
      const auto& gender = result.genders.label_of(researcher);
      if (gender != kFemale && gender != kMale) continue;
      const int age = std::min(config.evaluation_year, tl.last_pub_year) - tl.first_pub_year;
      ++expected[{mobility_category_name(*category), gender, age}];
    }
    const auto rows = parse_csv_file(result.bundle.files.at("pyramid.csv"));
    std::map<std::tuple<std::string, std::string, int>, std::int64_t> emitted;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      emitted[{rows[i][0], rows[i][1], std::stoi(rows[i][2])}] = std::stoll(rows[i][3]);
    }
    CHECK(emitted == expected);
  }

  SECTION("rate rows equal accumulate_exposure cells") {
    std::vector<AnalysisResearcher> researchers;
    for (const auto& [researcher, tl] : result.timelines.by_researcher) {
      researchers.push_back({&tl, result.genders.label_of(researcher)});
    }
    std::map<std::string, ExposureLedger> ledgers;
    for (const auto& cohort : config.cohorts) {
      ledgers.emplace(cohort.label,
                      accumulate_exposure(researchers, cohort, config.period_start,
                                          config.period_end,
                                          {config.censor_at_last_pub, config.period_end}));
    }
    const auto rows = parse_csv_file(result.bundle.files.at("rates.csv"));
    REQUIRE(rows.size() > 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& row = rows[i];
      const auto& ledger = ledgers.at(row[0]);
      const StratumKey key{row[1], std::stoi(row[2]),
                           row[3].empty() ? -1 : std::stoi(row[3])};
      const auto& cell = ledger.cells.at(key);
      const auto rate = row[3].empty() ? departure_rate(cell) : return_rate(cell);
      CHECK(format_double(rate.person_years) == row[4]);
      CHECK(std::to_string(rate.events) == row[5]);
      CHECK(format_double(rate.rate_per_1000) == row[6]);
    }
  }

  SECTION("country flow shares equal country_return_share") {
    std::vector<const ResearcherTimeline*> timelines;
    for (const auto& [researcher, tl] : result.timelines.by_researcher) {
      timelines.push_back(&tl);
    }
    const auto rows = parse_csv_file(result.bundle.files.at("country_flows.csv"));
    REQUIRE(rows.size() > 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(format_double(country_return_share(timelines, rows[i][0])) == rows[i][4]);
    }
  }

  SECTION("correlations equal pearson over the emitted scatter data") {
    const auto scatter = parse_csv_file(result.bundle.files.at("return_vs_collab.csv"));
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_scope;
    for (std::size_t i = 1; i < scatter.size(); ++i) {
      if (scatter[i][5].empty()) continue;
      by_scope[scatter[i][0]].first.push_back(std::stod(scatter[i][5]));
      by_scope[scatter[i][0]].second.push_back(std::stod(scatter[i][4]));
    }
    const auto rows = parse_csv_file(result.bundle.files.at("correlation.csv"));
    REQUIRE(rows.size() > 1);
    bool any_defined = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& [xs, ys] = by_scope.at(rows[i][0]);
      CHECK(std::to_string(xs.size()) == rows[i][2]);
      if (rows[i][1].empty()) continue;
      any_defined = true;
      // scatter columns carry 12 significant digits, so recomputation from
      // them agrees to ~1e-9
      CHECK(pearson(xs, ys) == Catch::Approx(std::stod(rows[i][1])).margin(1e-9));
    }
    CHECK(any_defined);
  }

  SECTION("summary counts equal a manual tally") {
    std::set<std::string> researchers;
    for (const auto& r : result.store.records()) {
      researchers.insert(result.revised.revised_of(r.record_id));
    }
    const auto rows = parse_csv_file(result.bundle.files.at("summary.csv"));
    bool found = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][0] == "researchers" && rows[i][1] == "total") {
        CHECK(rows[i][2] == std::to_string(researchers.size()));
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("summaries of tiny and empty populations") {
  SECTION("ten researchers tally by hand") {
    std::vector<AuthorshipRecord> records;
    for (int i = 0; i < 10; ++i) {
      const bool female = i < 4;
      records.push_back(testutil::make_record(
          "r" + std::to_string(i), "a" + std::to_string(i), 2000 + i % 3,
          female ? "Anna Schmidt" : "Peter Weber", "DE"));
    }
    const auto store = RecordStore::from_records(std::move(records));
    const auto revised = identity_id_map(store);
    const auto timelines = build_timelines(store, revised);
    std::map<std::string, std::string> names;
    for (const auto& [author, ids] : store.author_index()) {
      names[author] = representative_name(store.records_of_author(author));
    }
    std::ifstream table_is(gender_table_path());
    const auto table = NameGenderTable::from_csv(table_is);
    const auto genders = assign_gender(names, table, 0.8, {});
    const auto summary =
        summarize_population(store, timelines, genders, revised, {}, 2020);
    std::map<std::pair<std::string, std::string>, std::string> lookup;
    for (const auto& [metric, key, value] : summary.rows) lookup[{metric, key}] = value;
    CHECK(lookup[{"researchers", "total"}] == "10");
    CHECK(lookup[{"researchers", "female"}] == "4");
    CHECK(lookup[{"researchers", "male"}] == "6");
    CHECK(lookup[{"category", "non_mover"}] == "10");
    CHECK(lookup[{"mobile_researchers", "female"}] == "0");
  }
  SECTION("empty store summarizes to zeros") {
    const RecordStore store;
    const auto summary = summarize_population(store, {}, {}, {}, {}, 2020);
    std::map<std::pair<std::string, std::string>, std::string> lookup;
    for (const auto& [metric, key, value] : summary.rows) lookup[{metric, key}] = value;
    CHECK(lookup[{"researchers", "total"}] == "0");
    CHECK(lookup[{"publications", "female"}] == "0");
  }
}

TEST_CASE("a store with no resolvable countries still produces a report") {
  TempDir tmp("allmissing");
  GeneratorConfig gen;
  gen.researcher_count = 20;
  gen.missing_country_probability = 1.0;
  gen.departure_hazard_female = {0.0};  // no abroad spells, so no DE coauthor records
  gen.departure_hazard_male = {0.0};
  gen.first_pub_year_min = 1998;
  gen.first_pub_year_max = 2001;
  gen.seed = 77;
  const auto input = write_synth_store(tmp.path, gen);
  auto map = base_config_map(input, "");
  map["imputer.enabled"] = "false";  // nothing to train on
  const auto result = run_pipeline(pipeline_config_from_map(map));
  CHECK(result.timelines.by_researcher.empty());
  CHECK(result.timelines.unresolved.size() == 20);
  CHECK(result.bundle.files.at("pyramid.csv") == "category,gender,academic_age,count\n");
  CHECK(result.bundle.files.count("summary.csv") == 1);
}

TEST_CASE("a failing stage leaves no partial outputs") {
  TempDir tmp("fail");
  GeneratorConfig gen;
  gen.researcher_count = 10;
  gen.seed = 2;
  const auto input = write_synth_store(tmp.path, gen);
  auto map = base_config_map(input, (tmp.path / "out").string());
  map["gender.table_path"] = (tmp.path / "no_such_table.csv").string();
  CHECK_THROWS_WITH(run_pipeline(pipeline_config_from_map(map)),
                    Catch::Matchers::ContainsSubstring("stage gender"));
  CHECK_FALSE(fs::exists(tmp.path / "out"));
}
