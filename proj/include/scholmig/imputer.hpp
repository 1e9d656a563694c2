#pragma once

// Missing-country imputation: tf-idf features over affiliation text feed a
// small feed-forward classifier. Training is fully seeded, the model file
// round-trips bit-exactly, and imputation never overwrites a country that is
// already present.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "scholmig/binio.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/neural.hpp"
#include "scholmig/record.hpp"
#include "scholmig/rng.hpp"
#include "scholmig/tfidf.hpp"

namespace scholmig {

inline constexpr const char* kUnknownCountry = "unknown";

struct CountryModel {
  TfidfVocabulary vocab;
  FeedForwardNet net;
  std::vector<std::string> classes;  // class index -> country code
  std::uint64_t training_seed = 0;

  bool operator==(const CountryModel& other) const {
    return vocab == other.vocab && net == other.net && classes == other.classes &&
           training_seed == other.training_seed;
  }
};

struct ImputerOptions {
  int epochs = 20;
  double learning_rate = 0.1;
  int batch_size = 32;
  int hidden_units = 256;
  int min_df = 2;
};

struct TrainResult {
  CountryModel model;
  double held_out_accuracy = 0.0;
};

// Deterministic given the seed: the labeled rows are shuffled once into an
// (1 - split_fraction) held-out tail, the vocabulary is built on the training
// split only, and mini-batch gradient descent minimizes cross-entropy.
inline TrainResult train_country_model(
    const std::vector<std::pair<Affiliation, std::string>>& labeled, double split_fraction,
    std::uint64_t seed, const ImputerOptions& options = {}) {
  if (labeled.empty()) throw DataError("no labeled affiliations to train on");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw DataError("split_fraction must lie in (0, 1)");
  }

  std::vector<std::string> classes;
  for (const auto& [aff, country] : labeled) classes.push_back(country);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw DataError("degenerate label set: need at least 2 countries");

  DetRng rng(splitmix64(seed ^ 0x7061727469ULL));
  std::vector<std::size_t> order(labeled.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::size_t train_n =
      static_cast<std::size_t>(split_fraction * static_cast<double>(labeled.size()));
  train_n = std::clamp<std::size_t>(train_n, 1, labeled.size() - 1);

  std::vector<Affiliation> train_affiliations;
  train_affiliations.reserve(train_n);
  for (std::size_t i = 0; i < train_n; ++i) train_affiliations.push_back(labeled[order[i]].first);

  TrainResult result;
  result.model.training_seed = seed;
  result.model.classes = std::move(classes);
  result.model.vocab = build_vocabulary(train_affiliations, options.min_df);

  const auto class_of = [&](const std::string& country) {
    const auto it = std::lower_bound(result.model.classes.begin(), result.model.classes.end(),
                                     country);
    return static_cast<int>(it - result.model.classes.begin());
  };

  std::vector<SparseVec> features(labeled.size());
  std::vector<int> labels(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    features[i] = vectorize(labeled[i].first, result.model.vocab);
    labels[i] = class_of(labeled[i].second);
  }

  result.model.net = FeedForwardNet::initialized(static_cast<int>(result.model.vocab.size()),
                                                 options.hidden_units,
                                                 static_cast<int>(result.model.classes.size()),
                                                 splitmix64(seed ^ 0x696e6974ULL));

  NetGradients grads = result.model.net.make_gradients();
  std::vector<std::size_t> train_order(order.begin(), order.begin() + static_cast<long>(train_n));
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(train_order);
    std::size_t pos = 0;
    while (pos < train_order.size()) {
      const std::size_t end =
          std::min(pos + static_cast<std::size_t>(options.batch_size), train_order.size());
      std::vector<std::pair<const SparseVec*, int>> batch;
      batch.reserve(end - pos);
      for (std::size_t k = pos; k < end; ++k) {
        batch.emplace_back(&features[train_order[k]], labels[train_order[k]]);
      }
      grads.zero();
      result.model.net.loss_and_grad(batch, grads);
      result.model.net.sgd_step(grads, options.learning_rate, batch.size());
      pos = end;
    }
  }

  std::size_t correct = 0;
  const std::size_t held_out = labeled.size() - train_n;
  for (std::size_t i = train_n; i < order.size(); ++i) {
    const auto probs = result.model.net.forward(features[order[i]]);
    const int predicted = static_cast<int>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    if (predicted == labels[order[i]]) ++correct;
  }
  result.held_out_accuracy =
      held_out == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(held_out);
  return result;
}

// Argmax class and its softmax score. An affiliation with no in-vocabulary
// token cannot be scored and returns the "unknown" sentinel with confidence 0.
inline std::pair<std::string, double> predict_country(const CountryModel& model,
                                                      const Affiliation& affiliation) {
  const SparseVec x = vectorize(affiliation, model.vocab);
  if (x.empty()) return {kUnknownCountry, 0.0};
  const auto probs = model.net.forward(x);
  const auto best = std::max_element(probs.begin(), probs.end());
  const int idx = static_cast<int>(best - probs.begin());
  return {model.classes[static_cast<std::size_t>(idx)], *best};
}

struct ImputationItem {
  std::string record_id;
  std::string predicted;
  double confidence = 0.0;
  bool applied = false;
};

struct ImputeResult {
  RecordStore store;
  std::vector<ImputationItem> report;

  std::size_t applied_count() const {
    std::size_t n = 0;
    for (const auto& item : report) n += item.applied ? 1 : 0;
    return n;
  }
};

// Fills missing countries with predictions at or above the confidence floor;
// existing countries are never touched. Records left missing are flagged in
// the report with applied=false.
inline ImputeResult impute_missing_countries(const RecordStore& store, const CountryModel& model,
                                             double confidence_floor) {
  std::vector<AuthorshipRecord> records = store.records();
  ImputeResult result;
  for (auto& r : records) {
    if (r.affiliation.country) continue;
    auto [code, confidence] = predict_country(model, r.affiliation);
    ImputationItem item{r.record_id, code, confidence, false};
    if (code != kUnknownCountry && confidence >= confidence_floor) {
      r.affiliation.country = code;
      item.applied = true;
    }
    result.report.push_back(std::move(item));
  }
  result.store = RecordStore::from_records(std::move(records));
  return result;
}

inline constexpr const char* kCountryModelMagic = "SMGCIM01";

inline void save_country_model(const CountryModel& model, std::ostream& os) {
  os.write(kCountryModelMagic, 8);
  binio::write_u64(os, 1);  // format version
  binio::write_u64(os, model.training_seed);
  binio::write_u64(os, model.vocab.tokens.size());
  for (std::size_t i = 0; i < model.vocab.tokens.size(); ++i) {
    binio::write_string(os, model.vocab.tokens[i]);
    binio::write_f64(os, model.vocab.idf[i]);
  }
  binio::write_i64(os, model.vocab.document_count);
  binio::write_u64(os, static_cast<std::uint64_t>(model.net.input_dim()));
  binio::write_u64(os, static_cast<std::uint64_t>(model.net.hidden_dim()));
  binio::write_u64(os, static_cast<std::uint64_t>(model.net.output_dim()));
  binio::write_f64_vector(os, model.net.w1);
  binio::write_f64_vector(os, model.net.b1);
  binio::write_f64_vector(os, model.net.w2);
  binio::write_f64_vector(os, model.net.b2);
  binio::write_u64(os, model.classes.size());
  for (const auto& c : model.classes) binio::write_string(os, c);
  if (!os) throw IoError("failed to write country model");
}

inline CountryModel load_country_model(std::istream& is) {
  binio::expect_magic(is, kCountryModelMagic);
  const std::uint64_t version = binio::read_u64(is);
  if (version != 1) throw DataError("unsupported country model version");
  CountryModel model;
  model.training_seed = binio::read_u64(is);
  const std::uint64_t vocab_size = binio::read_u64(is);
  model.vocab.tokens.reserve(vocab_size);
  model.vocab.idf.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    std::string token = binio::read_string(is);
    model.vocab.index.emplace(token, static_cast<int>(i));
    model.vocab.tokens.push_back(std::move(token));
    model.vocab.idf.push_back(binio::read_f64(is));
  }
  model.vocab.document_count = binio::read_i64(is);
  const int input = static_cast<int>(binio::read_u64(is));
  const int hidden = static_cast<int>(binio::read_u64(is));
  const int output = static_cast<int>(binio::read_u64(is));
  model.net = FeedForwardNet(input, hidden, output);
  model.net.w1 = binio::read_f64_vector(is);
  model.net.b1 = binio::read_f64_vector(is);
  model.net.w2 = binio::read_f64_vector(is);
  model.net.b2 = binio::read_f64_vector(is);
  const std::uint64_t class_count = binio::read_u64(is);
  for (std::uint64_t i = 0; i < class_count; ++i) model.classes.push_back(binio::read_string(is));
  return model;
}

inline void save_country_model_file(const CountryModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  save_country_model(model, os);
}

inline CountryModel load_country_model_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  return load_country_model(is);
}

}  // namespace scholmig
