// scholmig command-line interface. Subcommands mirror the pipeline stages and
// run independently on persisted intermediates; `report` drives the full
// pipeline from a config file. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 internal error.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scholmig/scholmig.hpp"

namespace {

using namespace scholmig;

RecordStore load_store(const std::string& path, const std::string& format) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  auto parsed = parse_records(is, format == "csv" ? RecordFormat::csv : RecordFormat::jsonl);
  if (!parsed.rejects.empty()) {
    std::cerr << parsed.rejects.size() << " rows rejected while loading " << path << "\n";
  }
  return std::move(parsed.store);
}

RevisedIdMap load_revised(const std::string& path, const RecordStore& store) {
  if (path.empty()) return identity_id_map(store);
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  return read_revised_ids_csv(is);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write: " + path);
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::map<std::string, std::vector<const AuthorshipRecord*>> group_by_researcher(
    const RecordStore& store, const RevisedIdMap& revised) {
  std::map<std::string, std::vector<const AuthorshipRecord*>> grouped;
  for (const auto& r : store.records()) {
    grouped[revised.revised_of(r.record_id)].push_back(&r);
  }
  return grouped;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconstructs researchers' migration life courses from authorship records"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic population with ground truth");
  std::string synth_config, synth_records = "records.jsonl", synth_truth = "truth.jsonl";
  std::uint64_t synth_seed = 0;
  int synth_count = 0;
  synth->add_option("--config", synth_config, "Generator config (key=value lines)");
  synth->add_option("--seed", synth_seed, "Seed override");
  synth->add_option("--researchers", synth_count, "Researcher count override");
  synth->add_option("--out-records", synth_records, "Output records JSONL");
  synth->add_option("--out-truth", synth_truth, "Output ground-truth JSONL");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse and validate an input file");
  std::string in_path, in_format = "jsonl", in_out = "store.jsonl", in_rejects = "rejects.jsonl";
  ingest->add_option("--input", in_path, "Input path")->required();
  ingest->add_option("--format", in_format, "jsonl|csv")->check(CLI::IsMember({"jsonl", "csv"}));
  ingest->add_option("--output", in_out, "Validated store (canonical JSONL)");
  ingest->add_option("--rejects", in_rejects, "Rejects report (JSONL)");

  // impute
  auto* impute = app.add_subcommand("impute", "Fill missing affiliation countries");
  std::string imp_store, imp_model, imp_out = "imputed.jsonl", imp_report = "imputation.csv";
  double imp_floor = 0.5;
  bool imp_train = false;
  std::uint64_t imp_seed = 42;
  int imp_epochs = 20;
  impute->add_option("--store", imp_store, "Store JSONL")->required();
  impute->add_option("--model", imp_model, "Model path")->required();
  impute->add_flag("--train", imp_train, "Train the model on the store's labeled rows first");
  impute->add_option("--floor", imp_floor, "Confidence floor");
  impute->add_option("--seed", imp_seed, "Training seed");
  impute->add_option("--epochs", imp_epochs, "Training epochs");
  impute->add_option("--output", imp_out, "Imputed store JSONL");
  impute->add_option("--report", imp_report, "Imputation report CSV");

  // disambiguate
  auto* dis = app.add_subcommand("disambiguate", "Split suspicious author profiles");
  std::string dis_store, dis_out = "revised_ids.csv";
  int dis_country = 6, dis_pub = 292;
  double dis_merge = 0.5;
  dis->add_option("--store", dis_store, "Store JSONL")->required();
  dis->add_option("--country-threshold", dis_country, "Distinct-country threshold");
  dis->add_option("--pub-threshold", dis_pub, "Distinct-publication threshold");
  dis->add_option("--merge-threshold", dis_merge, "Average-linkage merge threshold");
  dis->add_option("--output", dis_out, "Revised id map CSV");

  // gender
  auto* gender = app.add_subcommand("gender", "Assign genders from first names");
  std::string gen_store, gen_revised, gen_table, gen_overrides, gen_out = "genders.csv";
  double gen_floor = 0.8;
  gender->add_option("--store", gen_store, "Store JSONL")->required();
  gender->add_option("--revised", gen_revised, "Revised id map CSV");
  gender->add_option("--table", gen_table, "Name-gender table CSV")->required();
  gender->add_option("--floor", gen_floor, "Probability floor");
  gender->add_option("--overrides", gen_overrides, "Manual overrides CSV");
  gender->add_option("--output", gen_out, "Assignments CSV");

  // mobility
  auto* mobility = app.add_subcommand("mobility", "Detect migration events");
  std::string mob_store, mob_revised, mob_out = "events.csv";
  mobility->add_option("--store", mob_store, "Store JSONL")->required();
  mobility->add_option("--revised", mob_revised, "Revised id map CSV");
  mobility->add_option("--output", mob_out, "Events CSV");

  // disciplines
  auto* disc = app.add_subcommand("disciplines", "Fit the topic model and assign disciplines");
  std::string disc_store, disc_revised, disc_map, disc_out = "disciplines.csv",
              disc_model_out, disc_top_words;
  int disc_k = 30, disc_iters = 1000, disc_min_count = 20, disc_top_n = 10;
  double disc_alpha = -1.0, disc_beta = 0.01, disc_pmi = 3.0;
  std::uint64_t disc_seed = 42;
  disc->add_option("--store", disc_store, "Store JSONL")->required();
  disc->add_option("--revised", disc_revised, "Revised id map CSV");
  disc->add_option("--k", disc_k, "Topic count");
  disc->add_option("--iters", disc_iters, "Gibbs iterations");
  disc->add_option("--seed", disc_seed, "Sampler seed");
  disc->add_option("--map", disc_map, "Topic->discipline map CSV");
  disc->add_option("--alpha", disc_alpha, "Dirichlet alpha (default 50/K)");
  disc->add_option("--beta", disc_beta, "Dirichlet beta");
  disc->add_option("--min-count", disc_min_count, "Collocation minimum count");
  disc->add_option("--pmi-threshold", disc_pmi, "Collocation PMI threshold");
  disc->add_option("--top-n", disc_top_n, "Top words per topic");
  disc->add_option("--output", disc_out, "Assignments CSV");
  disc->add_option("--model-out", disc_model_out, "Topic model dump path");
  disc->add_option("--top-words", disc_top_words, "Top-words CSV path");

  // rates
  auto* rates_cmd = app.add_subcommand("rates", "Compute cohort person-time rates");
  std::string rates_store, rates_revised, rates_genders, rates_outdir = ".", rates_cohorts,
      rates_disciplines;
  int rates_max_age = 5, rates_max_ysd = 5, rates_p0 = kWindowStartYear, rates_p1 = kWindowEndYear;
  bool rates_no_censor = false;
  rates_cmd->add_option("--store", rates_store, "Store JSONL")->required();
  rates_cmd->add_option("--revised", rates_revised, "Revised id map CSV");
  rates_cmd->add_option("--genders", rates_genders, "Gender assignments CSV");
  rates_cmd->add_option("--disciplines", rates_disciplines,
                        "Researcher disciplines CSV; enables the return-vs-collaboration "
                        "scatter and correlation report");
  rates_cmd->add_option("--cohorts", rates_cohorts, "Cohort spec, e.g. 1998-2001;2002-2005");
  rates_cmd->add_option("--period-start", rates_p0, "Period start year");
  rates_cmd->add_option("--period-end", rates_p1, "Period end year");
  rates_cmd->add_option("--max-age", rates_max_age, "Max academic age at departure");
  rates_cmd->add_option("--max-ysd", rates_max_ysd, "Max years since departure");
  rates_cmd->add_flag("--no-censor-at-last-pub", rates_no_censor,
                      "Extend exposure to the window edge instead of the last publication");
  rates_cmd->add_option("--output-dir", rates_outdir, "Output directory");

  // report
  auto* report = app.add_subcommand("report", "Run the full pipeline from a config file");
  std::string report_config;
  report->add_option("--config", report_config, "Pipeline config file")->required();

  // score
  auto* score = app.add_subcommand("score", "Score inferred artifacts against ground truth");
  std::string score_store, score_truth, score_revised, score_imputed, score_events,
      score_topics, score_out = "scores.csv";
  score->add_option("--store", score_store, "Store JSONL")->required();
  score->add_option("--truth", score_truth, "Ground-truth JSONL")->required();
  score->add_option("--revised", score_revised, "Revised id map CSV");
  score->add_option("--imputed", score_imputed, "Imputed store JSONL");
  score->add_option("--events", score_events, "Events CSV");
  score->add_option("--topics", score_topics, "Researcher topics CSV (revised_author_id,topic,...)");
  score->add_option("--output", score_out, "Scores CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1; --help exits 0
  }

  try {
    if (synth->parsed()) {
      GeneratorConfig config;
      if (!synth_config.empty()) {
        std::ifstream is(synth_config);
        if (!is) throw IoError("cannot open config: " + synth_config);
        const auto map = read_config_map(is);
        for (const auto& [key, value] : map) {
          if (key == "researcher_count") config.researcher_count = std::stoi(value);
          else if (key == "first_pub_year_min") config.first_pub_year_min = std::stoi(value);
          else if (key == "first_pub_year_max") config.first_pub_year_max = std::stoi(value);
          else if (key == "observed_years") config.observed_years = std::stoi(value);
          else if (key == "publications_per_year") config.publications_per_year = std::stod(value);
          else if (key == "departure_hazard_female") config.departure_hazard_female = pipeline_detail::parse_double_list(value);
          else if (key == "departure_hazard_male") config.departure_hazard_male = pipeline_detail::parse_double_list(value);
          else if (key == "return_hazard") config.return_hazard = pipeline_detail::parse_double_list(value);
          else if (key == "origin_abroad_probability") config.origin_abroad_probability = std::stod(value);
          else if (key == "tie_injection_probability") config.tie_injection_probability = std::stod(value);
          else if (key == "missing_country_probability") config.missing_country_probability = std::stod(value);
          else if (key == "merge_contamination_rate") config.merge_contamination_rate = std::stod(value);
          else if (key == "merged_profile_publications_per_year") config.merged_profile_publications_per_year = std::stoi(value);
          else if (key == "coauthor_de_link_probability") config.coauthor_de_link_probability = std::stod(value);
          else if (key == "topic_count") config.topic_count = std::stoi(value);
          else if (key == "topic_vocab_size") config.topic_vocab_size = std::stoi(value);
          else if (key == "title_tokens") config.title_tokens = std::stoi(value);
          else if (key == "keyword_tokens") config.keyword_tokens = std::stoi(value);
          else if (key == "seed") config.seed = std::stoull(value);
          else throw DataError("unknown generator key: " + key);
        }
      }
      if (synth->count("--seed")) config.seed = synth_seed;
      if (synth->count("--researchers")) config.researcher_count = synth_count;
      auto [store, truth] = generate(config);
      std::ostringstream records_os;
      serialize_records(store, records_os, RecordFormat::jsonl);
      write_text(synth_records, records_os.str());
      std::ostringstream truth_os;
      write_ground_truth(truth, truth_os);
      write_text(synth_truth, truth_os.str());
      std::cout << "generated " << store.size() << " records for " << truth.researchers.size()
                << " researchers\n";
    } else if (ingest->parsed()) {
      std::ifstream is(in_path, std::ios::binary);
      if (!is) throw IoError("cannot open: " + in_path);
      auto parsed =
          parse_records(is, in_format == "csv" ? RecordFormat::csv : RecordFormat::jsonl);
      std::ostringstream os;
      serialize_records(parsed.store, os, RecordFormat::jsonl);
      write_text(in_out, os.str());
      write_text(in_rejects, rejects_to_jsonl(parsed.rejects));
      std::cout << "accepted " << parsed.store.size() << " records, rejected "
                << parsed.rejects.size() << "\n";
    } else if (impute->parsed()) {
      auto store = load_store(imp_store, "jsonl");
      CountryModel model;
      if (imp_train) {
        std::vector<std::pair<Affiliation, std::string>> labeled;
        for (const auto& r : store.records()) {
          if (r.affiliation.country) labeled.emplace_back(r.affiliation, *r.affiliation.country);
        }
        ImputerOptions options;
        options.epochs = imp_epochs;
        auto trained = train_country_model(labeled, 0.8, imp_seed, options);
        std::cout << "held-out accuracy " << trained.held_out_accuracy << "\n";
        model = std::move(trained.model);
        save_country_model_file(model, imp_model);
      } else {
        model = load_country_model_file(imp_model);
      }
      auto imputed = impute_missing_countries(store, model, imp_floor);
      std::ostringstream os;
      serialize_records(imputed.store, os, RecordFormat::jsonl);
      write_text(imp_out, os.str());
      std::string report_csv = "record_id,predicted,confidence,applied\n";
      for (const auto& item : imputed.report) {
        report_csv += csv::join_row({item.record_id, item.predicted,
                                     format_double(item.confidence),
                                     item.applied ? "true" : "false"});
      }
      write_text(imp_report, report_csv);
      std::cout << "imputed " << imputed.applied_count() << " of " << imputed.report.size()
                << " missing countries\n";
    } else if (dis->parsed()) {
      auto store = load_store(dis_store, "jsonl");
      DisambiguatorOptions options;
      options.country_threshold = dis_country;
      options.publication_threshold = dis_pub;
      options.merge_threshold = dis_merge;
      auto result = disambiguate_store(store, options);
      std::ostringstream os;
      write_revised_ids_csv(result.revised, store, os);
      write_text(dis_out, os.str());
      std::cout << "flagged " << result.flagged.size() << " profiles, issued "
                << result.revised.revised_to_original.size() << " ids\n";
    } else if (gender->parsed()) {
      auto store = load_store(gen_store, "jsonl");
      auto revised = load_revised(gen_revised, store);
      std::ifstream table_is(gen_table);
      if (!table_is) throw IoError("cannot open: " + gen_table);
      auto table = NameGenderTable::from_csv(table_is);
      std::map<std::string, std::string> overrides;
      if (!gen_overrides.empty()) {
        std::ifstream ov(gen_overrides);
        if (!ov) throw IoError("cannot open: " + gen_overrides);
        overrides = read_overrides_csv(ov);
      }
      std::map<std::string, std::string> names;
      for (const auto& [researcher, records] : group_by_researcher(store, revised)) {
        names[researcher] = representative_name(records);
      }
      auto assignment = assign_gender(names, table, gen_floor, overrides);
      std::string out = "revised_author_id,gender,method\n";
      for (const auto& [researcher, entry] : assignment.by_researcher) {
        out += csv::join_row({researcher, entry.label, gender_method_name(entry.method)});
      }
      write_text(gen_out, out);
      std::cout << "coverage " << assignment.coverage() << "\n";
    } else if (mobility->parsed()) {
      auto store = load_store(mob_store, "jsonl");
      auto revised = load_revised(mob_revised, store);
      auto timelines = build_timelines(store, revised);
      std::vector<MigrationEvent> events;
      for (const auto& [researcher, tl] : timelines.by_researcher) {
        for (auto& e : detect_events(tl)) events.push_back(std::move(e));
      }
      std::ostringstream os;
      write_events_csv(events, os);
      write_text(mob_out, os.str());
      std::cout << events.size() << " events across " << timelines.by_researcher.size()
                << " researchers\n";
    } else if (disc->parsed()) {
      auto store = load_store(disc_store, "jsonl");
      auto revised = load_revised(disc_revised, store);
      std::vector<AuthorDocument> documents;
      for (const auto& [researcher, records] : group_by_researcher(store, revised)) {
        documents.push_back(build_document(researcher, records));
      }
      const auto collocations = detect_collocations(documents, disc_min_count, disc_pmi);
      documents = apply_collocations(documents, collocations);
      const double alpha = disc_alpha > 0 ? disc_alpha : 50.0 / disc_k;
      const auto model = fit_lda(documents, disc_k, alpha, disc_beta, disc_iters, disc_seed);
      std::cout << "coherence " << coherence(model, documents, disc_top_n) << "\n";
      DisciplineMap map;
      if (!disc_map.empty()) {
        std::ifstream is(disc_map);
        if (!is) throw IoError("cannot open: " + disc_map);
        map = DisciplineMap::from_csv(is);
      } else {
        for (int k = 0; k < disc_k; ++k) {
          map.topic_to_discipline[k] =
              canonical_disciplines()[static_cast<std::size_t>(k) %
                                      canonical_disciplines().size()];
        }
      }
      map.validate(disc_k);
      std::string out = "revised_author_id,topic,discipline\n";
      for (std::size_t d = 0; d < documents.size(); ++d) {
        const auto row = model.doc_topic_row(d);
        out += csv::join_row({documents[d].researcher_id,
                              std::to_string(model.doc_argmax_topic(d)),
                              assign_discipline(row, map)});
      }
      write_text(disc_out, out);
      if (!disc_model_out.empty()) {
        std::ofstream os(disc_model_out, std::ios::binary);
        if (!os) throw IoError("cannot write: " + disc_model_out);
        save_topic_model(model, os);
      }
      if (!disc_top_words.empty()) {
        std::string tw = "topic_index,rank,token,count\n";
        for (int k = 0; k < model.topic_count; ++k) {
          const auto top = top_words(model, k, disc_top_n);
          for (std::size_t rank = 0; rank < top.size(); ++rank) {
            tw += csv::join_row(
                {std::to_string(k), std::to_string(rank),
                 model.vocabulary[static_cast<std::size_t>(top[rank])],
                 std::to_string(model.topic_word_counts[static_cast<std::size_t>(k)]
                                                       [static_cast<std::size_t>(top[rank])])});
          }
        }
        write_text(disc_top_words, tw);
      }
    } else if (rates_cmd->parsed()) {
      auto store = load_store(rates_store, "jsonl");
      auto revised = load_revised(rates_revised, store);
      auto timelines = build_timelines(store, revised);
      GenderAssignment genders;
      if (!rates_genders.empty()) {
        std::ifstream is(rates_genders);
        if (!is) throw IoError("cannot open: " + rates_genders);
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
          if (line.empty()) continue;
          const auto fields = csv::parse_line(line);
          if (fields.size() < 2) throw DataError("bad gender assignment row");
          genders.by_researcher[fields[0]] = {fields[1], GenderMethod::table};
        }
      }
      std::vector<AnalysisResearcher> researchers;
      for (const auto& [researcher, tl] : timelines.by_researcher) {
        researchers.push_back({&tl, genders.label_of(researcher)});
      }
      const auto cohorts = rates_cohorts.empty() ? canonical_cohorts()
                                                 : pipeline_detail::parse_cohorts(rates_cohorts);
      const ExposureOptions options{!rates_no_censor, rates_p1};
      std::vector<std::tuple<std::string, StratumKey, bool, RateResult>> rows;
      for (const auto& cohort : cohorts) {
        const auto ledger = accumulate_exposure(researchers, cohort, rates_p0, rates_p1, options);
        for (const std::string g : {"all", kFemale, kMale}) {
          for (int age = 1; age <= rates_max_age; ++age) {
            const auto cell = ledger.cells.find({g, age, -1});
            if (cell != ledger.cells.end() && cell->second.person_years_in_germany > 0.0) {
              rows.emplace_back(cohort.label, cell->first, false, departure_rate(cell->second));
            }
            for (int ysd = 1; ysd <= rates_max_ysd; ++ysd) {
              const auto rcell = ledger.cells.find({g, age, ysd});
              if (rcell != ledger.cells.end() && rcell->second.person_years_outside > 0.0) {
                rows.emplace_back(cohort.label, rcell->first, true, return_rate(rcell->second));
              }
            }
          }
        }
      }
      std::ostringstream os;
      write_rate_table_csv(os, rows);
      std::filesystem::create_directories(rates_outdir);
      write_text(rates_outdir + "/rates.csv", os.str());

      std::string flows =
          "host_country,outward_researchers,share_of_outward,returned,return_share\n";
      for (const auto& row : country_flow_table(timelines.by_researcher)) {
        flows += csv::join_row({row.host_country, std::to_string(row.outward),
                                format_double(row.share_of_outward),
                                std::to_string(row.returned),
                                format_double(row.return_share)});
      }
      write_text(rates_outdir + "/country_flows.csv", flows);

      const auto index = PublicationCountryIndex::build(store);
      const auto grouped = group_by_researcher(store, revised);
      std::map<std::string, CollabRatio> ratios;
      std::string cr_csv = "revised_author_id,de_linked,total,ratio\n";
      for (const auto& [researcher, tl] : timelines.by_researcher) {
        if (!outward_status(tl).outward) continue;
        try {
          const auto cr = collaborative_ratio(tl, grouped.at(researcher), index);
          ratios.emplace(researcher, cr);
          cr_csv += csv::join_row({researcher, std::to_string(cr.de_linked),
                                   std::to_string(cr.total), format_double(cr.ratio)});
        } catch (const DataError&) {
          // no abroad-period publications
        }
      }
      write_text(rates_outdir + "/collaborative_ratios.csv", cr_csv);

      if (!rates_disciplines.empty()) {
        std::ifstream is(rates_disciplines);
        if (!is) throw IoError("cannot open: " + rates_disciplines);
        std::map<std::string, std::string> disciplines;
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
          if (line.empty()) continue;
          const auto fields = csv::parse_line(line);
          if (fields.size() < 3) throw DataError("bad disciplines row");
          disciplines[fields[0]] = fields[2];
        }
        const auto scatter = discipline_return_collab(timelines.by_researcher, disciplines,
                                                      ratios, cohorts);
        std::string rvc =
            "scope,discipline,outward_count,returnee_count,return_share,mean_collab_ratio\n";
        for (const auto& row : scatter.rows) {
          rvc += csv::join_row({row.scope, row.discipline, std::to_string(row.outward),
                                std::to_string(row.returned), format_double(row.return_share),
                                row.has_ratio ? format_double(row.mean_collab_ratio)
                                              : std::string()});
        }
        write_text(rates_outdir + "/return_vs_collab.csv", rvc);
        std::string corr = "scope,pearson_r,n\n";
        for (const auto& c : scatter.correlations) {
          corr += csv::join_row({c.scope,
                                 c.defined ? format_double(c.pearson_r) : std::string(),
                                 std::to_string(c.n)});
        }
        write_text(rates_outdir + "/correlation.csv", corr);
      }
      std::cout << rows.size() << " rate rows\n";
    } else if (report->parsed()) {
      const auto config = load_pipeline_config(report_config);
      auto result = run_pipeline(config);
      std::cout << "wrote " << result.bundle.files.size() << " files to "
                << (config.output_dir.empty() ? "." : config.output_dir) << "\n";
    } else if (score->parsed()) {
      auto store = load_store(score_store, "jsonl");
      std::ifstream truth_is(score_truth);
      if (!truth_is) throw IoError("cannot open: " + score_truth);
      auto truth = read_ground_truth(truth_is);
      InferredArtifacts artifacts;
      RevisedIdMap revised = load_revised(score_revised, store);
      artifacts.revised = &revised;
      RecordStore imputed;
      if (!score_imputed.empty()) {
        imputed = load_store(score_imputed, "jsonl");
        artifacts.imputed_store = &imputed;
      }
      std::vector<MigrationEvent> events;
      if (!score_events.empty()) {
        std::ifstream is(score_events);
        if (!is) throw IoError("cannot open: " + score_events);
        events = read_events_csv(is);
        artifacts.events = &events;
      }
      std::map<std::string, int> topics;
      if (!score_topics.empty()) {
        std::ifstream is(score_topics);
        if (!is) throw IoError("cannot open: " + score_topics);
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
          if (line.empty()) continue;
          const auto fields = csv::parse_line(line);
          if (fields.size() < 2) throw DataError("bad topics row");
          topics[fields[0]] = std::stoi(fields[1]);
        }
        artifacts.researcher_topics = &topics;
      }
      const auto scores = score_inference(store, truth, artifacts);
      std::string out = "metric,value\n";
      const auto add = [&](const std::string& metric, double value) {
        if (value >= 0.0) out += csv::join_row({metric, format_double(value)});
      };
      add("disambiguation_precision", scores.disambiguation_all.precision);
      add("disambiguation_recall", scores.disambiguation_all.recall);
      add("disambiguation_f1", scores.disambiguation_all.f1);
      add("disambiguation_contaminated_f1", scores.disambiguation_contaminated.f1);
      add("imputation_accuracy", scores.imputation_accuracy);
      add("imputation_coverage", scores.imputation_coverage);
      add("event_precision", scores.event_precision);
      add("event_recall", scores.event_recall);
      add("topic_accuracy", scores.topic_accuracy);
      write_text(score_out, out);
      std::cout << out;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
