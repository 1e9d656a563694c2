#pragma once

// End-to-end orchestration: ingest -> impute -> disambiguate -> gender ->
// mobility -> disciplines -> rates -> reports. The report bundle is built
// fully in memory and flushed to the output directory only when every stage
// has succeeded, so a failing run leaves no partial outputs. All emitted
// numbers are reproducible by calling the owning module with the manifest's
// parameters, and a rerun with the same seed and inputs is byte-identical.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scholmig/disambiguator.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/gender.hpp"
#include "scholmig/imputer.hpp"
#include "scholmig/lda.hpp"
#include "scholmig/mobility.hpp"
#include "scholmig/rates.hpp"
#include "scholmig/record.hpp"
#include "scholmig/rng.hpp"

namespace scholmig {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct PipelineConfig {
  std::string input_path;
  RecordFormat input_format = RecordFormat::jsonl;
  std::string output_dir;
  std::uint64_t seed = 0;

  bool imputer_enabled = true;
  std::string imputer_model_path;  // empty: train on the input's labeled rows
  double imputer_floor = 0.5;
  double imputer_split_fraction = 0.8;
  ImputerOptions imputer_options;

  DisambiguatorOptions disambiguator;

  std::string gender_table_path;
  double gender_probability_floor = 0.8;
  std::string gender_overrides_path;

  int lda_k = 3;
  double lda_alpha = -1.0;  // negative: use 50 / K
  double lda_beta = 0.01;
  int lda_iterations = 300;
  int lda_top_n = 10;
  std::string lda_map_path;  // empty: cycle topics over the canonical names
  int collocation_min_count = 20;
  double collocation_pmi_threshold = 3.0;

  std::vector<Cohort> cohorts = canonical_cohorts();
  int period_start = kWindowStartYear;
  int period_end = kWindowEndYear;
  int max_age = 5;
  int max_years_since_departure = 5;
  bool censor_at_last_pub = true;

  int evaluation_year = kWindowEndYear;

  double effective_lda_alpha() const {
    return lda_alpha > 0.0 ? lda_alpha : 50.0 / static_cast<double>(lda_k);
  }
};

namespace pipeline_detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw DataError("config key " + key + ": expected a boolean, got '" + v + "'");
}

inline std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

inline std::vector<Cohort> parse_cohorts(const std::string& v) {
  std::vector<Cohort> cohorts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) throw DataError("bad cohort spec: " + item);
    cohorts.push_back({item, std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1))});
  }
  if (cohorts.empty()) throw DataError("empty cohort list");
  return cohorts;
}

}  // namespace pipeline_detail

// Flat key-value config file: one `key=value` per line, '#' comments, keys
// namespaced by module.
inline std::map<std::string, std::string> read_config_map(std::istream& is) {
  std::map<std::string, std::string> map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    const auto first = trimmed.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    trimmed = trimmed.substr(first);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trimmed.substr(0, eq);
    std::string value = trimmed.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    const auto vstart = value.find_first_not_of(" \t");
    value = vstart == std::string::npos ? std::string() : value.substr(vstart);
    map[key] = value;
  }
  return map;
}

inline PipelineConfig pipeline_config_from_map(const std::map<std::string, std::string>& map) {
  namespace pd = pipeline_detail;
  PipelineConfig config;
  bool seed_seen = false;
  for (const auto& [key, value] : map) {
    try {
    if (key == "input.path") config.input_path = value;
    else if (key == "input.format") {
      if (value == "jsonl") config.input_format = RecordFormat::jsonl;
      else if (value == "csv") config.input_format = RecordFormat::csv;
      else throw DataError("input.format must be jsonl or csv");
    } else if (key == "output.dir") config.output_dir = value;
    else if (key == "seed") {
      config.seed = std::stoull(value);
      seed_seen = true;
    } else if (key == "imputer.enabled") config.imputer_enabled = pd::parse_bool(value, key);
    else if (key == "imputer.model_path") config.imputer_model_path = value;
    else if (key == "imputer.floor") config.imputer_floor = std::stod(value);
    else if (key == "imputer.split_fraction") config.imputer_split_fraction = std::stod(value);
    else if (key == "imputer.min_df") config.imputer_options.min_df = std::stoi(value);
    else if (key == "imputer.hidden_units") config.imputer_options.hidden_units = std::stoi(value);
    else if (key == "imputer.epochs") config.imputer_options.epochs = std::stoi(value);
    else if (key == "imputer.learning_rate") config.imputer_options.learning_rate = std::stod(value);
    else if (key == "imputer.batch_size") config.imputer_options.batch_size = std::stoi(value);
    else if (key == "disambiguator.country_threshold") config.disambiguator.country_threshold = std::stoi(value);
    else if (key == "disambiguator.pub_threshold") config.disambiguator.publication_threshold = std::stoi(value);
    else if (key == "disambiguator.merge_threshold") config.disambiguator.merge_threshold = std::stod(value);
    else if (key == "disambiguator.weights") {
      const auto w = pd::parse_double_list(value);
      if (w.size() != 5) throw DataError("disambiguator.weights needs 5 values");
      config.disambiguator.weights = {w[0], w[1], w[2], w[3], w[4]};
    } else if (key == "gender.table_path") config.gender_table_path = value;
    else if (key == "gender.probability_floor") config.gender_probability_floor = std::stod(value);
    else if (key == "gender.overrides_path") config.gender_overrides_path = value;
    else if (key == "lda.k") config.lda_k = std::stoi(value);
    else if (key == "lda.alpha") config.lda_alpha = std::stod(value);
    else if (key == "lda.beta") config.lda_beta = std::stod(value);
    else if (key == "lda.iterations") config.lda_iterations = std::stoi(value);
    else if (key == "lda.top_n") config.lda_top_n = std::stoi(value);
    else if (key == "lda.map_path") config.lda_map_path = value;
    else if (key == "lda.collocation_min_count") config.collocation_min_count = std::stoi(value);
    else if (key == "lda.collocation_pmi_threshold") config.collocation_pmi_threshold = std::stod(value);
    else if (key == "rates.cohorts") config.cohorts = pd::parse_cohorts(value);
    else if (key == "rates.period_start") config.period_start = std::stoi(value);
    else if (key == "rates.period_end") config.period_end = std::stoi(value);
    else if (key == "rates.max_age") config.max_age = std::stoi(value);
    else if (key == "rates.max_years_since_departure") config.max_years_since_departure = std::stoi(value);
    else if (key == "rates.censor_at_last_pub") config.censor_at_last_pub = pd::parse_bool(value, key);
    else if (key == "report.evaluation_year") config.evaluation_year = std::stoi(value);
    else throw DataError("unknown config key: " + key);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception&) {
      throw DataError("config key " + key + ": bad value '" + value + "'");
    }
  }
  if (config.input_path.empty()) throw DataError("config is missing input.path");
  if (!seed_seen) throw DataError("config is missing the mandatory seed");
  return config;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  return pipeline_config_from_map(read_config_map(is));
}

struct ReportBundle {
  std::map<std::string, std::string> files;  // filename -> bytes

  bool operator==(const ReportBundle&) const = default;
};

struct PipelineResult {
  ReportBundle bundle;
  RecordStore store;  // after imputation
  std::vector<Reject> rejects;
  RevisedIdMap revised;
  GenderAssignment genders;
  TimelineSet timelines;
  std::map<std::string, int> researcher_topics;          // revised id -> argmax topic
  std::map<std::string, std::string> researcher_disciplines;
  std::vector<MigrationEvent> events;
  std::map<std::string, CollabRatio> collab_ratios;
  double lda_coherence = 0.0;
  double imputer_accuracy = -1.0;
};

struct PopulationSummary {
  // metric/key/value rows; schema fixed so the CSV stays stable.
  std::vector<std::tuple<std::string, std::string, std::string>> rows;
};

namespace pipeline_detail {

inline double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace pipeline_detail

inline PopulationSummary summarize_population(
    const RecordStore& store, const TimelineSet& timelines, const GenderAssignment& genders,
    const RevisedIdMap& revised,
    const std::map<std::string, std::string>& researcher_disciplines, int evaluation_year) {
  PopulationSummary summary;
  const auto add = [&](const std::string& metric, const std::string& key,
                       const std::string& value) {
    summary.rows.emplace_back(metric, key, value);
  };

  std::map<std::string, std::set<std::string>> publications_by_gender;
  std::map<std::string, std::set<std::string>> researchers_by_gender;
  for (const auto& r : store.records()) {
    const auto& researcher = revised.revised_of(r.record_id);
    const auto& gender = genders.label_of(researcher);
    publications_by_gender[gender].insert(r.publication_id);
    researchers_by_gender[gender].insert(researcher);
  }
  std::size_t total_researchers = 0;
  for (const auto& [g, ids] : researchers_by_gender) total_researchers += ids.size();
  add("researchers", "total", std::to_string(total_researchers));
  for (const auto& g : {kFemale, kMale, kUnknownGender}) {
    add("researchers", g, std::to_string(researchers_by_gender[g].size()));
    add("publications", g, std::to_string(publications_by_gender[g].size()));
  }

  std::map<std::string, std::size_t> category_counts;
  std::map<std::string, std::size_t> mobile_by_gender;
  std::map<std::string, std::vector<double>> ages_by_category_gender;
  for (const auto& [researcher, tl] : timelines.by_researcher) {
    if (evaluation_year < tl.first_pub_year) continue;
    const auto category = classify(tl, evaluation_year);
    const std::string name = category ? mobility_category_name(*category) : "excluded";
    ++category_counts[name];
    const auto& gender = genders.label_of(researcher);
    if (!detect_events(tl).empty()) ++mobile_by_gender[gender];
    const int age = std::min(evaluation_year, tl.last_pub_year) - tl.first_pub_year;
    ages_by_category_gender[name + "_" + gender].push_back(static_cast<double>(age));
  }
  for (const auto& [name, count] : category_counts) {
    add("category", name, std::to_string(count));
  }
  for (const auto& g : {kFemale, kMale}) {
    add("mobile_researchers", g, std::to_string(mobile_by_gender[g]));
  }
  for (const auto& [key, ages] : ages_by_category_gender) {
    add("median_academic_age", key, format_double(pipeline_detail::median_of(ages)));
  }

  std::map<std::string, std::size_t> discipline_counts;
  for (const auto& [researcher, discipline] : researcher_disciplines) ++discipline_counts[discipline];
  if (!discipline_counts.empty()) {
    std::vector<double> counts;
    for (const auto& [d, c] : discipline_counts) counts.push_back(static_cast<double>(c));
    add("discipline_researchers", "min",
        format_double(*std::min_element(counts.begin(), counts.end())));
    add("discipline_researchers", "max",
        format_double(*std::max_element(counts.begin(), counts.end())));
    add("discipline_researchers", "median",
        format_double(pipeline_detail::median_of(counts)));
  }
  return summary;
}

inline PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;
  nlohmann::ordered_json stages;

  const auto stage = [&](const char* name, auto&& body) {
    try {
      body();
    } catch (const IoError& e) {
      throw IoError(std::string("stage ") + name + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string("stage ") + name + ": " + e.what());
    }
  };

  // ingest
  std::string input_bytes;
  stage("ingest", [&] {
    std::ifstream is(config.input_path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + config.input_path);
    std::stringstream buffer;
    buffer << is.rdbuf();
    input_bytes = buffer.str();
    std::istringstream stream(input_bytes);
    auto parsed = parse_records(stream, config.input_format);
    result.store = std::move(parsed.store);
    result.rejects = std::move(parsed.rejects);
    stages["ingest"] = {{"records", result.store.size()}, {"rejects", result.rejects.size()}};
  });

  // impute
  stage("impute", [&] {
    const auto missing = missing_country_records(result.store);
    std::size_t applied = 0;
    bool trained = false;
    if (config.imputer_enabled && !missing.empty()) {
      CountryModel model;
      if (!config.imputer_model_path.empty() &&
          std::filesystem::exists(config.imputer_model_path)) {
        model = load_country_model_file(config.imputer_model_path);
      } else {
        std::vector<std::pair<Affiliation, std::string>> labeled;
        for (const auto& r : result.store.records()) {
          if (r.affiliation.country) labeled.emplace_back(r.affiliation, *r.affiliation.country);
        }
        auto trained_model =
            train_country_model(labeled, config.imputer_split_fraction,
                                splitmix64(config.seed ^ 0x696d7075746572ULL),
                                config.imputer_options);
        model = std::move(trained_model.model);
        result.imputer_accuracy = trained_model.held_out_accuracy;
        trained = true;
        if (!config.imputer_model_path.empty()) {
          save_country_model_file(model, config.imputer_model_path);
        }
      }
      auto imputed = impute_missing_countries(result.store, model, config.imputer_floor);
      applied = imputed.applied_count();
      result.store = std::move(imputed.store);
      std::string report = "record_id,predicted,confidence,applied\n";
      for (const auto& item : imputed.report) {
        report += csv::join_row({item.record_id, item.predicted,
                                 format_double(item.confidence),
                                 item.applied ? "true" : "false"});
      }
      result.bundle.files["imputation.csv"] = std::move(report);
    } else {
      result.bundle.files["imputation.csv"] = "record_id,predicted,confidence,applied\n";
    }
    stages["impute"] = {{"missing", missing.size()},
                        {"applied", applied},
                        {"trained", trained},
                        {"held_out_accuracy", result.imputer_accuracy}};
  });

  // disambiguate
  stage("disambiguate", [&] {
    auto dis = disambiguate_store(result.store, config.disambiguator);
    result.revised = std::move(dis.revised);
    std::ostringstream os;
    write_revised_ids_csv(result.revised, result.store, os);
    result.bundle.files["revised_ids.csv"] = os.str();
    stages["disambiguate"] = {{"flagged", dis.flagged.size()},
                              {"revised_profiles", result.revised.revised_to_original.size()}};
  });

  // gender
  stage("gender", [&] {
    if (config.gender_table_path.empty()) throw DataError("gender.table_path not configured");
    std::ifstream table_is(config.gender_table_path);
    if (!table_is) throw IoError("cannot open gender table: " + config.gender_table_path);
    const auto table = NameGenderTable::from_csv(table_is);
    std::map<std::string, std::string> overrides;
    if (!config.gender_overrides_path.empty()) {
      std::ifstream ov(config.gender_overrides_path);
      if (!ov) throw IoError("cannot open overrides: " + config.gender_overrides_path);
      overrides = read_overrides_csv(ov);
    }
    std::map<std::string, std::vector<const AuthorshipRecord*>> grouped;
    for (const auto& r : result.store.records()) {
      grouped[result.revised.revised_of(r.record_id)].push_back(&r);
    }
    std::map<std::string, std::string> names;
    for (const auto& [researcher, records] : grouped) {
      names[researcher] = representative_name(records);
    }
    result.genders = assign_gender(names, table, config.gender_probability_floor, overrides);
    std::string csv_out = "revised_author_id,gender,method\n";
    std::size_t female = 0, male = 0, unknown = 0;
    for (const auto& [researcher, entry] : result.genders.by_researcher) {
      csv_out += csv::join_row({researcher, entry.label, gender_method_name(entry.method)});
      if (entry.label == kFemale) ++female;
      else if (entry.label == kMale) ++male;
      else ++unknown;
    }
    result.bundle.files["gender_assignments.csv"] = std::move(csv_out);
    stages["gender"] = {{"female", female}, {"male", male}, {"unknown", unknown}};
  });

  // mobility
  stage("mobility", [&] {
    result.timelines = build_timelines(result.store, result.revised);
    for (const auto& [researcher, tl] : result.timelines.by_researcher) {
      for (auto& e : detect_events(tl)) result.events.push_back(std::move(e));
    }
    std::ostringstream os;
    write_events_csv(result.events, os);
    result.bundle.files["events.csv"] = os.str();
    stages["mobility"] = {{"researchers", result.timelines.by_researcher.size()},
                          {"unresolved", result.timelines.unresolved.size()},
                          {"events", result.events.size()}};
  });

  // disciplines
  stage("disciplines", [&] {
    std::map<std::string, std::vector<const AuthorshipRecord*>> grouped;
    for (const auto& r : result.store.records()) {
      grouped[result.revised.revised_of(r.record_id)].push_back(&r);
    }
    std::vector<AuthorDocument> documents;
    documents.reserve(grouped.size());
    for (const auto& [researcher, records] : grouped) {
      documents.push_back(build_document(researcher, records));
    }
    const auto collocations = detect_collocations(documents, config.collocation_min_count,
                                                  config.collocation_pmi_threshold);
    documents = apply_collocations(documents, collocations);
    const auto model =
        fit_lda(documents, config.lda_k, config.effective_lda_alpha(), config.lda_beta,
                config.lda_iterations, splitmix64(config.seed ^ 0x6c6461746f70ULL));
    result.lda_coherence = coherence(model, documents, config.lda_top_n);

    DisciplineMap map;
    if (!config.lda_map_path.empty()) {
      std::ifstream is(config.lda_map_path);
      if (!is) throw IoError("cannot open discipline map: " + config.lda_map_path);
      map = DisciplineMap::from_csv(is);
    } else {
      for (int k = 0; k < config.lda_k; ++k) {
        map.topic_to_discipline[k] =
            canonical_disciplines()[static_cast<std::size_t>(k) % canonical_disciplines().size()];
      }
    }
    map.validate(config.lda_k);

    std::string csv_out = "revised_author_id,topic,discipline\n";
    for (std::size_t d = 0; d < documents.size(); ++d) {
      const auto row = model.doc_topic_row(d);
      const int topic = model.doc_argmax_topic(d);
      const std::string discipline = assign_discipline(row, map);
      result.researcher_topics[documents[d].researcher_id] = topic;
      result.researcher_disciplines[documents[d].researcher_id] = discipline;
      csv_out += csv::join_row({documents[d].researcher_id, std::to_string(topic), discipline});
    }
    result.bundle.files["researcher_disciplines.csv"] = std::move(csv_out);

    std::string tw = "topic_index,rank,token,count\n";
    for (int k = 0; k < model.topic_count; ++k) {
      const auto top = top_words(model, k, config.lda_top_n);
      for (std::size_t rank = 0; rank < top.size(); ++rank) {
        tw += csv::join_row(
            {std::to_string(k), std::to_string(rank),
             model.vocabulary[static_cast<std::size_t>(top[rank])],
             std::to_string(model.topic_word_counts[static_cast<std::size_t>(k)]
                                                   [static_cast<std::size_t>(top[rank])])});
      }
    }
    result.bundle.files["topic_top_words.csv"] = std::move(tw);
    std::ostringstream model_os(std::ios::binary);
    save_topic_model(model, model_os);
    result.bundle.files["lda_model.bin"] = model_os.str();
    stages["disciplines"] = {{"documents", documents.size()},
                             {"k", config.lda_k},
                             {"coherence", result.lda_coherence},
                             {"collocations", collocations.bigrams.size()}};
  });

  // rates
  stage("rates", [&] {
    std::vector<AnalysisResearcher> researchers;
    for (const auto& [researcher, tl] : result.timelines.by_researcher) {
      researchers.push_back({&tl, result.genders.label_of(researcher)});
    }
    const ExposureOptions options{config.censor_at_last_pub, config.period_end};

    std::vector<std::tuple<std::string, StratumKey, bool, RateResult>> rows;
    for (const auto& cohort : config.cohorts) {
      const auto ledger = accumulate_exposure(researchers, cohort, config.period_start,
                                              config.period_end, options);
      for (const std::string gender : {"all", kFemale, kMale}) {
        for (int age = 1; age <= config.max_age; ++age) {
          const auto cell = ledger.cells.find({gender, age, -1});
          if (cell != ledger.cells.end() && cell->second.person_years_in_germany > 0.0) {
            rows.emplace_back(cohort.label, cell->first, false, departure_rate(cell->second));
          }
          for (int ysd = 1; ysd <= config.max_years_since_departure; ++ysd) {
            const auto rcell = ledger.cells.find({gender, age, ysd});
            if (rcell != ledger.cells.end() && rcell->second.person_years_outside > 0.0) {
              rows.emplace_back(cohort.label, rcell->first, true, return_rate(rcell->second));
            }
          }
        }
      }
    }
    std::ostringstream rates_os;
    write_rate_table_csv(rates_os, rows);
    result.bundle.files["rates.csv"] = rates_os.str();

    // Country flows and return shares by first host country.
    std::string flows = "host_country,outward_researchers,share_of_outward,returned,return_share\n";
    std::int64_t total_outward = 0;
    for (const auto& row : country_flow_table(result.timelines.by_researcher)) {
      total_outward += row.outward;
      flows += csv::join_row({row.host_country, std::to_string(row.outward),
                              format_double(row.share_of_outward), std::to_string(row.returned),
                              format_double(row.return_share)});
    }
    result.bundle.files["country_flows.csv"] = std::move(flows);

    // Collaborative ratios for outward researchers.
    const auto index = PublicationCountryIndex::build(result.store);
    std::map<std::string, std::vector<const AuthorshipRecord*>> grouped;
    for (const auto& r : result.store.records()) {
      grouped[result.revised.revised_of(r.record_id)].push_back(&r);
    }
    std::string cr_csv = "revised_author_id,de_linked,total,ratio\n";
    for (const auto& [researcher, tl] : result.timelines.by_researcher) {
      if (!outward_status(tl).outward) continue;
      try {
        const auto cr = collaborative_ratio(tl, grouped.at(researcher), index);
        result.collab_ratios.emplace(researcher, cr);
        cr_csv += csv::join_row({researcher, std::to_string(cr.de_linked),
                                 std::to_string(cr.total), format_double(cr.ratio)});
      } catch (const DataError&) {
        // no abroad-period publications: excluded from CR aggregates
      }
    }
    result.bundle.files["collaborative_ratios.csv"] = std::move(cr_csv);
    stages["rates"] = {{"rate_rows", rows.size()},
                       {"outward", total_outward},
                       {"collab_researchers", result.collab_ratios.size()}};
  });

  // reports
  stage("report", [&] {
    // Pyramid: category x gender x academic age at the evaluation year.
    std::map<std::tuple<std::string, std::string, int>, std::int64_t> pyramid;
    for (const auto& [researcher, tl] : result.timelines.by_researcher) {
      if (config.evaluation_year < tl.first_pub_year) continue;
      const auto category = classify(tl, config.evaluation_year);
      if (!category) continue;
      const auto& gender = result.genders.label_of(researcher);
      if (gender != kFemale && gender != kMale) continue;
      const int age = std::min(config.evaluation_year, tl.last_pub_year) - tl.first_pub_year;
      ++pyramid[{mobility_category_name(*category), gender, age}];
    }
    std::string pyramid_csv = "category,gender,academic_age,count\n";
    for (const auto& [key, count] : pyramid) {
      pyramid_csv += csv::join_row({std::get<0>(key), std::get<1>(key),
                                    std::to_string(std::get<2>(key)), std::to_string(count)});
    }
    result.bundle.files["pyramid.csv"] = std::move(pyramid_csv);

    // Female share by discipline x cohort x group, plus a per-discipline
    // baseline row over all researchers.
    std::map<std::tuple<std::string, std::string, std::string>, std::pair<std::int64_t, std::int64_t>>
        share;  // (discipline, cohort, group) -> (female, male)
    for (const auto& [researcher, tl] : result.timelines.by_researcher) {
      const auto& gender = result.genders.label_of(researcher);
      if (gender != kFemale && gender != kMale) continue;
      const auto disc = result.researcher_disciplines.find(researcher);
      if (disc == result.researcher_disciplines.end()) continue;
      auto& baseline = share[{disc->second, "all", "baseline"}];
      (gender == kFemale ? baseline.first : baseline.second) += 1;
      const auto cohort = assign_cohort(tl.first_pub_year, config.cohorts);
      if (!cohort || config.evaluation_year < tl.first_pub_year) continue;
      const auto category = classify(tl, config.evaluation_year);
      if (!category) continue;
      if (*category == MobilityCategory::outward || *category == MobilityCategory::returnee) {
        auto& cell = share[{disc->second, cohort->label, mobility_category_name(*category)}];
        (gender == kFemale ? cell.first : cell.second) += 1;
      }
    }
    std::string share_csv = "discipline,cohort,group,female,male,female_share\n";
    for (const auto& [key, counts] : share) {
      const auto total = counts.first + counts.second;
      share_csv += csv::join_row(
          {std::get<0>(key), std::get<1>(key), std::get<2>(key),
           std::to_string(counts.first), std::to_string(counts.second),
           format_double(static_cast<double>(counts.first) / static_cast<double>(total))});
    }
    result.bundle.files["female_share.csv"] = std::move(share_csv);

    // Return share vs collaborative ratio per discipline, overall and by
    // cohort, with Pearson correlations across disciplines.
    const auto scatter =
        discipline_return_collab(result.timelines.by_researcher,
                                 result.researcher_disciplines, result.collab_ratios,
                                 config.cohorts);
    std::string rvc = "scope,discipline,outward_count,returnee_count,return_share,mean_collab_ratio\n";
    for (const auto& row : scatter.rows) {
      rvc += csv::join_row({row.scope, row.discipline, std::to_string(row.outward),
                            std::to_string(row.returned), format_double(row.return_share),
                            row.has_ratio ? format_double(row.mean_collab_ratio)
                                          : std::string()});
    }
    result.bundle.files["return_vs_collab.csv"] = std::move(rvc);

    std::string corr = "scope,pearson_r,n\n";
    for (const auto& c : scatter.correlations) {
      corr += csv::join_row({c.scope, c.defined ? format_double(c.pearson_r) : std::string(),
                             std::to_string(c.n)});
    }
    result.bundle.files["correlation.csv"] = std::move(corr);

    const auto summary =
        summarize_population(result.store, result.timelines, result.genders, result.revised,
                             result.researcher_disciplines, config.evaluation_year);
    std::string summary_csv = "metric,key,value\n";
    for (const auto& [metric, key, value] : summary.rows) {
      summary_csv += csv::join_row({metric, key, value});
    }
    result.bundle.files["summary.csv"] = std::move(summary_csv);

    std::ostringstream rejects_os;
    rejects_os << rejects_to_jsonl(result.rejects);
    result.bundle.files["rejects.jsonl"] = rejects_os.str();

    std::ostringstream store_os;
    serialize_records(result.store, store_os, RecordFormat::jsonl);
    result.bundle.files["records_processed.jsonl"] = store_os.str();
  });

  // manifest
  {
    nlohmann::ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["seed"] = config.seed;
    nlohmann::ordered_json cfg;
    cfg["input.path"] = config.input_path;
    cfg["input.format"] = config.input_format == RecordFormat::jsonl ? "jsonl" : "csv";
    cfg["output.dir"] = config.output_dir;
    cfg["imputer.enabled"] = config.imputer_enabled;
    cfg["imputer.model_path"] = config.imputer_model_path;
    cfg["imputer.floor"] = config.imputer_floor;
    cfg["imputer.split_fraction"] = config.imputer_split_fraction;
    cfg["imputer.min_df"] = config.imputer_options.min_df;
    cfg["imputer.hidden_units"] = config.imputer_options.hidden_units;
    cfg["imputer.epochs"] = config.imputer_options.epochs;
    cfg["imputer.learning_rate"] = config.imputer_options.learning_rate;
    cfg["imputer.batch_size"] = config.imputer_options.batch_size;
    cfg["disambiguator.country_threshold"] = config.disambiguator.country_threshold;
    cfg["disambiguator.pub_threshold"] = config.disambiguator.publication_threshold;
    cfg["disambiguator.merge_threshold"] = config.disambiguator.merge_threshold;
    cfg["disambiguator.weights"] = {config.disambiguator.weights.name,
                                    config.disambiguator.weights.coauthor,
                                    config.disambiguator.weights.subject,
                                    config.disambiguator.weights.funding,
                                    config.disambiguator.weights.grant};
    cfg["gender.table_path"] = config.gender_table_path;
    cfg["gender.probability_floor"] = config.gender_probability_floor;
    cfg["gender.overrides_path"] = config.gender_overrides_path;
    cfg["lda.k"] = config.lda_k;
    cfg["lda.alpha"] = config.effective_lda_alpha();
    cfg["lda.beta"] = config.lda_beta;
    cfg["lda.iterations"] = config.lda_iterations;
    cfg["lda.top_n"] = config.lda_top_n;
    cfg["lda.map_path"] = config.lda_map_path;
    cfg["lda.collocation_min_count"] = config.collocation_min_count;
    cfg["lda.collocation_pmi_threshold"] = config.collocation_pmi_threshold;
    std::string cohort_spec;
    for (const auto& c : config.cohorts) {
      if (!cohort_spec.empty()) cohort_spec.push_back(';');
      cohort_spec += c.label;
    }
    cfg["rates.cohorts"] = cohort_spec;
    cfg["rates.period_start"] = config.period_start;
    cfg["rates.period_end"] = config.period_end;
    cfg["rates.max_age"] = config.max_age;
    cfg["rates.max_years_since_departure"] = config.max_years_since_departure;
    cfg["rates.censor_at_last_pub"] = config.censor_at_last_pub;
    cfg["report.evaluation_year"] = config.evaluation_year;
    manifest["config"] = std::move(cfg);
    manifest["input_fingerprint"] = fnv1a64(input_bytes);
    manifest["stages"] = std::move(stages);
    nlohmann::ordered_json outputs;
    for (const auto& [name, bytes] : result.bundle.files) outputs[name] = fnv1a64(bytes);
    manifest["outputs"] = std::move(outputs);
    result.bundle.files["manifest.json"] = manifest.dump(2) + "\n";
  }

  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    std::vector<std::filesystem::path> written;
    try {
      for (const auto& [name, bytes] : result.bundle.files) {
        const auto path = std::filesystem::path(config.output_dir) / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw IoError("cannot write " + path.string());
        written.push_back(path);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw IoError("failed writing " + path.string());
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& path : written) std::filesystem::remove(path, ec);
      throw;
    }
  }
  return result;
}

}  // namespace scholmig
