#pragma once

// Pairwise similarity of authorship records sharing an author id, over five
// channels: full-name edit similarity plus Jaccard overlap of coauthors,
// subject tags, funding texts, and grant numbers. A channel that is empty on
// both sides is uninformative and contributes half its weight.

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "scholmig/errors.hpp"
#include "scholmig/record.hpp"
#include "scholmig/text.hpp"

namespace scholmig {

struct SimilarityWeights {
  double name = 0.4;
  double coauthor = 0.3;
  double subject = 0.1;
  double funding = 0.1;
  double grant = 0.1;

  void validate() const {
    const double sum = name + coauthor + subject + funding + grant;
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("similarity weights must sum to 1");
    if (name < 0 || coauthor < 0 || subject < 0 || funding < 0 || grant < 0) {
      throw DataError("similarity weights must be non-negative");
    }
  }
};

namespace detail {

inline double jaccard_channel(const std::vector<std::string>& a,
                              const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.5;  // uninformative
  if (sa.empty() || sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace detail

inline double pair_similarity(const AuthorshipRecord& a, const AuthorshipRecord& b,
                              const SimilarityWeights& w = {}) {
  w.validate();
  double score = 0.0;
  score += w.name * text::name_similarity(a.author_full_name, b.author_full_name);
  score += w.coauthor * detail::jaccard_channel(a.coauthor_names, b.coauthor_names);
  score += w.subject * detail::jaccard_channel(a.subject_tags, b.subject_tags);
  score += w.funding * detail::jaccard_channel(a.funding_texts, b.funding_texts);
  score += w.grant * detail::jaccard_channel(a.grant_numbers, b.grant_numbers);
  return score;
}

// Symmetric pairwise distances in [0, 1] with a zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const { return n_; }

  double at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

// distance = 1 - pair_similarity for every record pair.
inline DistanceMatrix build_distance_matrix(
    const std::vector<const AuthorshipRecord*>& records, const SimilarityWeights& w = {}) {
  if (records.size() < 2) throw DataError("distance matrix needs at least 2 records");
  DistanceMatrix m(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      m.set(i, j, 1.0 - pair_similarity(*records[i], *records[j], w));
    }
  }
  return m;
}

}  // namespace scholmig
