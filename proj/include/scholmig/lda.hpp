#pragma once

// Discipline inference: one token document per researcher (titles, venues,
// keywords; stop-worded and suffix-stemmed), PMI-scored 2-/3-gram collocation
// joining, latent Dirichlet allocation fit by collapsed Gibbs sampling, a
// document co-occurrence (UMass-form) coherence rescaled to [0, 1], and a
// topic -> discipline map over the 17 canonical discipline names.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "scholmig/binio.hpp"
#include "scholmig/csv.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/record.hpp"
#include "scholmig/rng.hpp"
#include "scholmig/text.hpp"

namespace scholmig {

struct AuthorDocument {
  std::string researcher_id;
  std::vector<std::string> tokens;
  std::map<std::string, std::int64_t> bag;
  bool empty_text = false;  // flagged when the records carried no usable text

  void rebuild_bag() {
    bag.clear();
    for (const auto& t : tokens) ++bag[t];
  }
};

// Concatenated title/venue/keyword text of one researcher's records,
// tokenized, stop-worded, and stemmed. Collocation joining happens later,
// corpus-wide.
inline AuthorDocument build_document(const std::string& researcher_id,
                                     const std::vector<const AuthorshipRecord*>& records) {
  if (records.empty()) throw DataError("cannot build a document from no records");
  AuthorDocument doc;
  doc.researcher_id = researcher_id;
  for (const auto* r : records) {
    std::string combined = r->publication_title;
    combined.push_back(' ');
    combined += r->journal_title;
    for (const auto& kw : r->keywords) {
      combined.push_back(' ');
      combined += kw;
    }
    for (const auto& tok : text::tokenize(combined)) {
      if (text::stopwords().count(tok)) continue;
      doc.tokens.push_back(text::stem(tok));
    }
  }
  doc.empty_text = doc.tokens.empty();
  doc.rebuild_bag();
  return doc;
}

struct Collocations {
  std::set<std::pair<std::string, std::string>> bigrams;  // includes trigram second pass
};

namespace detail {

// Pointwise mutual information of adjacent pairs:
//   pmi(a, b) = ln( (c_ab / pairs) / ((c_a / tokens) * (c_b / tokens)) )
inline std::set<std::pair<std::string, std::string>> score_pairs(
    const std::vector<AuthorDocument>& documents, int min_count, double score_threshold) {
  std::unordered_map<std::string, std::int64_t> unigram;
  std::map<std::pair<std::string, std::string>, std::int64_t> pair_counts;
  std::int64_t total_tokens = 0;
  std::int64_t total_pairs = 0;
  for (const auto& doc : documents) {
    total_tokens += static_cast<std::int64_t>(doc.tokens.size());
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      ++unigram[doc.tokens[i]];
      if (i + 1 < doc.tokens.size()) {
        ++pair_counts[{doc.tokens[i], doc.tokens[i + 1]}];
        ++total_pairs;
      }
    }
  }
  std::set<std::pair<std::string, std::string>> accepted;
  if (total_pairs == 0 || total_tokens == 0) return accepted;
  for (const auto& [pair, count] : pair_counts) {
    if (count < min_count) continue;
    const double p_ab = static_cast<double>(count) / static_cast<double>(total_pairs);
    const double p_a =
        static_cast<double>(unigram[pair.first]) / static_cast<double>(total_tokens);
    const double p_b =
        static_cast<double>(unigram[pair.second]) / static_cast<double>(total_tokens);
    const double pmi = std::log(p_ab / (p_a * p_b));
    if (pmi >= score_threshold) accepted.insert(pair);
  }
  return accepted;
}

inline std::vector<std::string> join_pass(
    const std::vector<std::string>& tokens,
    const std::set<std::pair<std::string, std::string>>& accepted) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (i + 1 < tokens.size() && accepted.count({tokens[i], tokens[i + 1]})) {
      out.push_back(tokens[i] + "_" + tokens[i + 1]);
      i += 2;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

}  // namespace detail

// Two scoring passes: the first finds 2-gram collocations, the second runs on
// the joined corpus so an accepted bigram plus a qualifying neighbor becomes
// a joined 3-gram.
inline Collocations detect_collocations(const std::vector<AuthorDocument>& documents,
                                        int min_count, double score_threshold) {
  Collocations result;
  const auto first = detail::score_pairs(documents, min_count, score_threshold);
  result.bigrams.insert(first.begin(), first.end());

  std::vector<AuthorDocument> joined = documents;
  for (auto& doc : joined) doc.tokens = detail::join_pass(doc.tokens, first);
  for (const auto& pair : detail::score_pairs(joined, min_count, score_threshold)) {
    const bool touches_join = pair.first.find('_') != std::string::npos ||
                              pair.second.find('_') != std::string::npos;
    if (touches_join) result.bigrams.insert(pair);
  }
  return result;
}

inline std::vector<AuthorDocument> apply_collocations(const std::vector<AuthorDocument>& documents,
                                                      const Collocations& collocations) {
  std::vector<AuthorDocument> out = documents;
  for (auto& doc : out) {
    doc.tokens = detail::join_pass(doc.tokens, collocations.bigrams);
    doc.tokens = detail::join_pass(doc.tokens, collocations.bigrams);
    doc.rebuild_bag();
  }
  return out;
}

struct TopicModel {
  int topic_count = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::vector<std::string> vocabulary;                 // word index -> token
  std::vector<std::vector<std::int64_t>> topic_word_counts;  // [k][w]
  std::vector<std::vector<std::int64_t>> doc_topic_counts;   // [d][k]
  std::vector<std::int64_t> topic_totals;              // [k]
  std::vector<std::int64_t> doc_lengths;               // [d]

  std::size_t vocab_size() const { return vocabulary.size(); }
  std::size_t doc_count() const { return doc_topic_counts.size(); }

  // Posterior point estimate with beta smoothing; each row sums to 1.
  std::vector<double> topic_word_row(int k) const {
    const double v = static_cast<double>(vocab_size());
    const auto& counts = topic_word_counts[static_cast<std::size_t>(k)];
    const double denom = static_cast<double>(topic_totals[static_cast<std::size_t>(k)]) + v * beta;
    std::vector<double> row(counts.size());
    for (std::size_t w = 0; w < counts.size(); ++w) {
      row[w] = (static_cast<double>(counts[w]) + beta) / denom;
    }
    return row;
  }

  // Posterior point estimate with alpha smoothing; each row sums to 1.
  std::vector<double> doc_topic_row(std::size_t d) const {
    const double k = static_cast<double>(topic_count);
    const auto& counts = doc_topic_counts[d];
    const double denom = static_cast<double>(doc_lengths[d]) + k * alpha;
    std::vector<double> row(counts.size());
    for (std::size_t t = 0; t < counts.size(); ++t) {
      row[t] = (static_cast<double>(counts[t]) + alpha) / denom;
    }
    return row;
  }

  int doc_argmax_topic(std::size_t d) const {
    const auto row = doc_topic_row(d);
    return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }

  bool operator==(const TopicModel& other) const {
    return topic_count == other.topic_count && alpha == other.alpha && beta == other.beta &&
           seed == other.seed && iterations == other.iterations &&
           vocabulary == other.vocabulary && topic_word_counts == other.topic_word_counts &&
           doc_topic_counts == other.doc_topic_counts && topic_totals == other.topic_totals &&
           doc_lengths == other.doc_lengths;
  }
};

// Collapsed Gibbs sampling over token-topic assignments:
//   p(z = k) ~ (n_dk + alpha) * (n_kw + beta) / (n_k + V * beta)
// Sweeps run in document order with an explicit engine, so a seed pins the
// full assignment history.
inline TopicModel fit_lda(const std::vector<AuthorDocument>& documents, int topic_count,
                          double alpha, double beta, int iterations, std::uint64_t seed) {
  if (topic_count < 2) throw DataError("topic_count must be >= 2");
  if (documents.size() < static_cast<std::size_t>(topic_count)) {
    throw DataError("corpus must have at least topic_count documents");
  }

  TopicModel model;
  model.topic_count = topic_count;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = seed;
  model.iterations = iterations;

  std::map<std::string, int> word_index;
  for (const auto& doc : documents) {
    for (const auto& t : doc.tokens) word_index.emplace(t, 0);
  }
  if (word_index.empty()) throw DataError("empty vocabulary: no document has tokens");
  model.vocabulary.reserve(word_index.size());
  for (auto& [token, idx] : word_index) {
    idx = static_cast<int>(model.vocabulary.size());
    model.vocabulary.push_back(token);
  }
  const std::size_t v = model.vocabulary.size();

  std::vector<std::vector<int>> docs_as_ids(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    docs_as_ids[d].reserve(documents[d].tokens.size());
    for (const auto& t : documents[d].tokens) docs_as_ids[d].push_back(word_index[t]);
  }

  model.topic_word_counts.assign(static_cast<std::size_t>(topic_count),
                                 std::vector<std::int64_t>(v, 0));
  model.doc_topic_counts.assign(documents.size(),
                                std::vector<std::int64_t>(static_cast<std::size_t>(topic_count), 0));
  model.topic_totals.assign(static_cast<std::size_t>(topic_count), 0);
  model.doc_lengths.assign(documents.size(), 0);

  DetRng rng(splitmix64(seed ^ 0x6c6461ULL));
  std::vector<std::vector<int>> assignments(documents.size());
  for (std::size_t d = 0; d < docs_as_ids.size(); ++d) {
    assignments[d].resize(docs_as_ids[d].size());
    model.doc_lengths[d] = static_cast<std::int64_t>(docs_as_ids[d].size());
    for (std::size_t i = 0; i < docs_as_ids[d].size(); ++i) {
      const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(topic_count)));
      assignments[d][i] = k;
      ++model.topic_word_counts[static_cast<std::size_t>(k)]
                               [static_cast<std::size_t>(docs_as_ids[d][i])];
      ++model.doc_topic_counts[d][static_cast<std::size_t>(k)];
      ++model.topic_totals[static_cast<std::size_t>(k)];
    }
  }

  const double v_beta = static_cast<double>(v) * beta;
  std::vector<double> weights(static_cast<std::size_t>(topic_count));
  for (int iter = 0; iter < iterations; ++iter) {
    for (std::size_t d = 0; d < docs_as_ids.size(); ++d) {
      for (std::size_t i = 0; i < docs_as_ids[d].size(); ++i) {
        const int word = docs_as_ids[d][i];
        const int old_k = assignments[d][i];
        --model.topic_word_counts[static_cast<std::size_t>(old_k)][static_cast<std::size_t>(word)];
        --model.doc_topic_counts[d][static_cast<std::size_t>(old_k)];
        --model.topic_totals[static_cast<std::size_t>(old_k)];

        double total = 0.0;
        for (int k = 0; k < topic_count; ++k) {
          const auto ks = static_cast<std::size_t>(k);
          const double w =
              (static_cast<double>(model.doc_topic_counts[d][ks]) + alpha) *
              (static_cast<double>(model.topic_word_counts[ks][static_cast<std::size_t>(word)]) +
               beta) /
              (static_cast<double>(model.topic_totals[ks]) + v_beta);
          weights[ks] = w;
          total += w;
        }
        double u = rng.uniform() * total;
        int new_k = topic_count - 1;
        for (int k = 0; k < topic_count; ++k) {
          u -= weights[static_cast<std::size_t>(k)];
          if (u <= 0.0) {
            new_k = k;
            break;
          }
        }
        assignments[d][i] = new_k;
        ++model.topic_word_counts[static_cast<std::size_t>(new_k)][static_cast<std::size_t>(word)];
        ++model.doc_topic_counts[d][static_cast<std::size_t>(new_k)];
        ++model.topic_totals[static_cast<std::size_t>(new_k)];
      }
    }
  }
  return model;
}

// Top-n words of a topic by probability; count ties resolve by word index.
inline std::vector<int> top_words(const TopicModel& model, int topic, int top_n) {
  std::vector<int> order(model.vocab_size());
  for (std::size_t w = 0; w < order.size(); ++w) order[w] = static_cast<int>(w);
  const auto& counts = model.topic_word_counts[static_cast<std::size_t>(topic)];
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_n)));
  return order;
}

// Mean document co-occurrence coherence over each topic's top_n words, UMass
// form rescaled per pair to [0, 1]:
//   raw(i, j)      = ln((D(wi, wj) + 1) / (D(wj) + 1))
//   rescaled(i, j) = 1 + raw / ln(D(wj) + 1)
// so always-co-occurring top words score 1 and never-co-occurring words score
// 0. A topic with no assigned tokens is vacuous and scores 0.
inline double coherence(const TopicModel& model, const std::vector<AuthorDocument>& documents,
                        int top_n = 10) {
  // Sorted posting lists: word index -> documents containing it.
  std::map<std::string, int> word_index;
  for (std::size_t w = 0; w < model.vocabulary.size(); ++w) {
    word_index.emplace(model.vocabulary[w], static_cast<int>(w));
  }
  std::unordered_map<int, std::vector<int>> postings;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (const auto& [token, count] : documents[d].bag) {
      const auto it = word_index.find(token);
      if (it != word_index.end()) postings[it->second].push_back(static_cast<int>(d));
    }
  }
  const auto co_count = [&](int a, int b) -> std::int64_t {
    const auto pa = postings.find(a);
    const auto pb = postings.find(b);
    if (pa == postings.end() || pb == postings.end()) return 0;
    std::int64_t both = 0;
    auto ia = pa->second.begin();
    auto ib = pb->second.begin();
    while (ia != pa->second.end() && ib != pb->second.end()) {
      if (*ia == *ib) {
        ++both;
        ++ia;
        ++ib;
      } else if (*ia < *ib) {
        ++ia;
      } else {
        ++ib;
      }
    }
    return both;
  };

  double topic_sum = 0.0;
  for (int k = 0; k < model.topic_count; ++k) {
    if (model.topic_totals[static_cast<std::size_t>(k)] == 0) continue;  // vacuous: scores 0
    const auto top = top_words(model, k, top_n);
    double pair_sum = 0.0;
    std::size_t pair_count = 0;
    for (std::size_t i = 1; i < top.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        ++pair_count;
        const auto pj = postings.find(top[j]);
        const std::int64_t dj =
            pj == postings.end() ? 0 : static_cast<std::int64_t>(pj->second.size());
        if (dj == 0) continue;
        const double raw = std::log((static_cast<double>(co_count(top[i], top[j])) + 1.0) /
                                    (static_cast<double>(dj) + 1.0));
        pair_sum += 1.0 + raw / std::log(static_cast<double>(dj) + 1.0);
      }
    }
    if (pair_count > 0) topic_sum += pair_sum / static_cast<double>(pair_count);
  }
  return model.topic_count == 0 ? 0.0 : topic_sum / static_cast<double>(model.topic_count);
}

struct KSelection {
  int best_k = 0;
  std::vector<std::pair<int, double>> scores;  // one row per grid entry
};

// Fits one model per grid entry (n_restarts fits averaged, seeds derived from
// the base seed) and returns the coherence argmax; ties prefer the smaller K.
inline KSelection select_k(const std::vector<AuthorDocument>& documents,
                           const std::vector<int>& k_grid, double alpha_numerator, double beta,
                           int iterations, std::uint64_t seed, int top_n = 10,
                           int n_restarts = 1) {
  if (k_grid.empty()) throw DataError("empty K grid");
  KSelection sel;
  for (const int k : k_grid) {
    double score = 0.0;
    for (int r = 0; r < n_restarts; ++r) {
      const auto model =
          fit_lda(documents, k, alpha_numerator / static_cast<double>(k), beta, iterations,
                  splitmix64(seed ^ (static_cast<std::uint64_t>(k) << 16) ^
                             static_cast<std::uint64_t>(r)));
      score += coherence(model, documents, top_n);
    }
    score /= static_cast<double>(n_restarts);
    sel.scores.emplace_back(k, score);
  }
  sel.best_k = sel.scores.front().first;
  double best = sel.scores.front().second;
  for (const auto& [k, score] : sel.scores) {
    if (score > best) {
      best = score;
      sel.best_k = k;
    }
  }
  return sel;
}

inline const std::vector<std::string>& canonical_disciplines() {
  static const std::vector<std::string> names = {
      "Agricultural, Biological and Environmental Sciences",
      "Biochemistry, Genetics and Molecular Biology",
      "Chemistry and Chemical Engineering",
      "Computer Science",
      "Earth and Planetary Sciences",
      "Economics and Social Science",
      "Engineering",
      "Energy",
      "Health Professions",
      "Immunology and Microbiology",
      "Materials Science",
      "Mathematics",
      "Medicine",
      "Neuroscience",
      "Pharmacology, Toxicology and Pharmaceutics",
      "Physics and Astronomy",
      "Psychology",
  };
  return names;
}

inline constexpr const char* kMultidisciplinary = "Multidisciplinary";

struct DisciplineMap {
  std::map<int, std::string> topic_to_discipline;
  double multidisciplinary_threshold = 0.3;

  void validate(int topic_count) const {
    const auto& canon = canonical_disciplines();
    for (int k = 0; k < topic_count; ++k) {
      const auto it = topic_to_discipline.find(k);
      if (it == topic_to_discipline.end()) {
        throw DataError("discipline map is missing topic " + std::to_string(k));
      }
      if (std::find(canon.begin(), canon.end(), it->second) == canon.end()) {
        throw DataError("not a canonical discipline name: " + it->second);
      }
    }
  }

  static DisciplineMap from_csv(std::istream& is) {
    DisciplineMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (line_no == 1 && line.rfind("topic_index,", 0) == 0) continue;
      const auto fields = csv::parse_line(line);
      if (fields.size() != 2) {
        throw DataError("discipline map line " + std::to_string(line_no) + ": expected 2 columns");
      }
      try {
        map.topic_to_discipline[std::stoi(fields[0])] = fields[1];
      } catch (const std::exception&) {
        throw DataError("discipline map line " + std::to_string(line_no) + ": bad topic index");
      }
    }
    return map;
  }
};

// Discipline of the argmax topic; a row whose maximum does not exceed the
// multidisciplinary threshold gets the Multidisciplinary label.
inline std::string assign_discipline(const std::vector<double>& doc_topic_row,
                                     const DisciplineMap& map) {
  if (doc_topic_row.empty()) throw DataError("empty doc-topic row");
  int best = 0;
  for (std::size_t k = 1; k < doc_topic_row.size(); ++k) {
    if (doc_topic_row[k] > doc_topic_row[static_cast<std::size_t>(best)]) {
      best = static_cast<int>(k);
    }
  }
  if (!(doc_topic_row[static_cast<std::size_t>(best)] > map.multidisciplinary_threshold)) {
    return kMultidisciplinary;
  }
  const auto it = map.topic_to_discipline.find(best);
  if (it == map.topic_to_discipline.end()) {
    throw DataError("discipline map is missing topic " + std::to_string(best));
  }
  return it->second;
}

inline constexpr const char* kTopicModelMagic = "SMGLDA01";

inline void save_topic_model(const TopicModel& model, std::ostream& os) {
  os.write(kTopicModelMagic, 8);
  binio::write_u64(os, 1);
  binio::write_u64(os, static_cast<std::uint64_t>(model.topic_count));
  binio::write_f64(os, model.alpha);
  binio::write_f64(os, model.beta);
  binio::write_u64(os, model.seed);
  binio::write_u64(os, static_cast<std::uint64_t>(model.iterations));
  binio::write_u64(os, model.vocabulary.size());
  for (const auto& w : model.vocabulary) binio::write_string(os, w);
  for (const auto& row : model.topic_word_counts) {
    for (const auto c : row) binio::write_i64(os, c);
  }
  binio::write_u64(os, model.doc_topic_counts.size());
  for (const auto& row : model.doc_topic_counts) {
    for (const auto c : row) binio::write_i64(os, c);
  }
  for (const auto c : model.topic_totals) binio::write_i64(os, c);
  for (const auto c : model.doc_lengths) binio::write_i64(os, c);
  if (!os) throw IoError("failed to write topic model");
}

inline TopicModel load_topic_model(std::istream& is) {
  binio::expect_magic(is, kTopicModelMagic);
  if (binio::read_u64(is) != 1) throw DataError("unsupported topic model version");
  TopicModel model;
  model.topic_count = static_cast<int>(binio::read_u64(is));
  model.alpha = binio::read_f64(is);
  model.beta = binio::read_f64(is);
  model.seed = binio::read_u64(is);
  model.iterations = static_cast<int>(binio::read_u64(is));
  const std::uint64_t v = binio::read_u64(is);
  model.vocabulary.reserve(v);
  for (std::uint64_t i = 0; i < v; ++i) model.vocabulary.push_back(binio::read_string(is));
  model.topic_word_counts.assign(static_cast<std::size_t>(model.topic_count),
                                 std::vector<std::int64_t>(v));
  for (auto& row : model.topic_word_counts) {
    for (auto& c : row) c = binio::read_i64(is);
  }
  const std::uint64_t d = binio::read_u64(is);
  model.doc_topic_counts.assign(d, std::vector<std::int64_t>(
                                       static_cast<std::size_t>(model.topic_count)));
  for (auto& row : model.doc_topic_counts) {
    for (auto& c : row) c = binio::read_i64(is);
  }
  model.topic_totals.assign(static_cast<std::size_t>(model.topic_count), 0);
  for (auto& c : model.topic_totals) c = binio::read_i64(is);
  model.doc_lengths.assign(d, 0);
  for (auto& c : model.doc_lengths) c = binio::read_i64(is);
  return model;
}

}  // namespace scholmig
