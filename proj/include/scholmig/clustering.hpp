#pragma once

// Agglomerative average-linkage clustering over a precomputed distance
// matrix. Every record starts in its own cluster; the pair with the smallest
// average linkage merges while that linkage stays at or below the threshold.
// Ties break on the lexicographically smallest pair of cluster positions, so
// the merge sequence is deterministic. Cluster-cluster distances are updated
// with the Lance-Williams rule for average linkage.

#include <algorithm>
#include <vector>

#include "scholmig/errors.hpp"
#include "scholmig/similarity.hpp"

namespace scholmig {

struct MergeStep {
  // Member index sets of the two clusters at the time of merging.
  std::vector<int> left;
  std::vector<int> right;
  double linkage = 0.0;
};

struct ClusterResult {
  // Disjoint index sets covering 0..n-1; members sorted, clusters ordered by
  // their smallest member.
  std::vector<std::vector<int>> clusters;
  std::vector<MergeStep> merges;
};

inline ClusterResult cluster(const DistanceMatrix& matrix, double merge_threshold) {
  const std::size_t n = matrix.size();
  ClusterResult result;
  if (n == 0) return result;

  std::vector<std::vector<int>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};

  // linkage[i][j]: mean pairwise distance between clusters i and j.
  std::vector<std::vector<double>> linkage(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) linkage[i][j] = matrix.at(i, j);
  }

  while (members.size() > 1) {
    std::size_t best_i = 0, best_j = 1;
    double best = linkage[0][1];
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (linkage[i][j] < best) {
          best = linkage[i][j];
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best > merge_threshold) break;

    result.merges.push_back({members[best_i], members[best_j], best});

    const double size_i = static_cast<double>(members[best_i].size());
    const double size_j = static_cast<double>(members[best_j].size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (k == best_i || k == best_j) continue;
      linkage[best_i][k] = linkage[k][best_i] =
          (size_i * linkage[best_i][k] + size_j * linkage[best_j][k]) / (size_i + size_j);
    }
    members[best_i].insert(members[best_i].end(), members[best_j].begin(),
                           members[best_j].end());
    members.erase(members.begin() + static_cast<long>(best_j));
    for (auto& row : linkage) row.erase(row.begin() + static_cast<long>(best_j));
    linkage.erase(linkage.begin() + static_cast<long>(best_j));
  }

  for (auto& m : members) std::sort(m.begin(), m.end());
  std::sort(members.begin(), members.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  result.clusters = std::move(members);
  return result;
}

}  // namespace scholmig
