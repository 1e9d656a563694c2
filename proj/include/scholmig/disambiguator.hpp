#pragma once

// Author disambiguation: profiles with implausibly many affiliation countries
// or publications are flagged, their records are compared pairwise, clustered
// agglomeratively, and each resulting cluster receives a fresh author id.
// Unflagged profiles keep their original ids, so the algorithm only ever
// splits, never merges across ids.

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scholmig/clustering.hpp"
#include "scholmig/csv.hpp"
#include "scholmig/errors.hpp"
#include "scholmig/record.hpp"
#include "scholmig/similarity.hpp"

namespace scholmig {

struct DisambiguatorOptions {
  int country_threshold = 6;
  int publication_threshold = 292;
  double merge_threshold = 0.5;
  SimilarityWeights weights = {};
};

// Author ids whose distinct affiliation-country count or distinct publication
// count strictly exceeds its threshold. Countries should be imputed first;
// records still missing a country do not contribute to the country count.
inline std::set<std::string> flag_suspicious(const RecordStore& store, int country_threshold = 6,
                                             int publication_threshold = 292) {
  std::set<std::string> flagged;
  for (const auto& [author_id, record_ids] : store.author_index()) {
    std::set<std::string> countries;
    std::set<std::string> publications;
    for (const auto& rid : record_ids) {
      const auto& r = store.by_id(rid);
      if (r.affiliation.country) countries.insert(*r.affiliation.country);
      publications.insert(r.publication_id);
    }
    if (static_cast<int>(countries.size()) > country_threshold ||
        static_cast<int>(publications.size()) > publication_threshold) {
      flagged.insert(author_id);
    }
  }
  return flagged;
}

struct RevisedIdMap {
  std::map<std::string, std::string> record_to_revised;
  std::map<std::string, std::string> revised_to_original;

  const std::string& revised_of(const std::string& record_id) const {
    const auto it = record_to_revised.find(record_id);
    if (it == record_to_revised.end()) throw DataError("record not mapped: " + record_id);
    return it->second;
  }

  bool operator==(const RevisedIdMap&) const = default;
};

// Revised ids from per-author clusterings. clusters_by_author maps a flagged
// author id to index sets over that author's records in store order. Every
// record of the store ends up mapped: unflagged authors keep their id, each
// cluster of a flagged author gets "<author_id>#<k>" in cluster order.
inline RevisedIdMap reissue_ids(
    const RecordStore& store,
    const std::map<std::string, std::vector<std::vector<int>>>& clusters_by_author) {
  RevisedIdMap map;
  for (const auto& [author_id, record_ids] : store.author_index()) {
    const auto it = clusters_by_author.find(author_id);
    if (it == clusters_by_author.end()) {
      for (const auto& rid : record_ids) map.record_to_revised[rid] = author_id;
      map.revised_to_original[author_id] = author_id;
      continue;
    }
    std::size_t covered = 0;
    for (std::size_t c = 0; c < it->second.size(); ++c) {
      const std::string revised = author_id + "#" + std::to_string(c);
      map.revised_to_original[revised] = author_id;
      for (int idx : it->second[c]) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= record_ids.size()) {
          throw DataError("cluster index out of range for author " + author_id);
        }
        map.record_to_revised[record_ids[static_cast<std::size_t>(idx)]] = revised;
        ++covered;
      }
    }
    if (covered != record_ids.size()) {
      throw DataError("clusters do not partition the records of author " + author_id);
    }
  }
  return map;
}

struct DisambiguationResult {
  std::set<std::string> flagged;
  std::map<std::string, std::vector<std::vector<int>>> clusters_by_author;
  std::map<std::string, std::vector<MergeStep>> merges_by_author;
  RevisedIdMap revised;
};

// Full pass over a store: flag, score, cluster, reissue. Single-record
// flagged profiles trivially form one cluster.
inline DisambiguationResult disambiguate_store(const RecordStore& store,
                                               const DisambiguatorOptions& options = {}) {
  options.weights.validate();
  DisambiguationResult result;
  result.flagged =
      flag_suspicious(store, options.country_threshold, options.publication_threshold);
  for (const auto& author_id : result.flagged) {
    const auto records = store.records_of_author(author_id);
    if (records.size() < 2) {
      result.clusters_by_author[author_id] = {{0}};
      continue;
    }
    const DistanceMatrix matrix = build_distance_matrix(records, options.weights);
    ClusterResult clustered = cluster(matrix, options.merge_threshold);
    result.merges_by_author[author_id] = std::move(clustered.merges);
    result.clusters_by_author[author_id] = std::move(clustered.clusters);
  }
  result.revised = reissue_ids(store, result.clusters_by_author);
  return result;
}

inline void write_revised_ids_csv(const RevisedIdMap& map, const RecordStore& store,
                                  std::ostream& os) {
  os << "record_id,original_author_id,revised_author_id\n";
  for (const auto& r : store.records()) {
    os << csv::join_row({r.record_id, r.author_id, map.revised_of(r.record_id)});
  }
}

inline RevisedIdMap read_revised_ids_csv(std::istream& is) {
  RevisedIdMap map;
  std::string line;
  if (!std::getline(is, line)) throw DataError("empty revised-id file");
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = csv::parse_line(line);
    if (fields.size() != 3) {
      throw DataError("revised-id line " + std::to_string(line_no) + ": expected 3 columns");
    }
    map.record_to_revised[fields[0]] = fields[2];
    map.revised_to_original[fields[2]] = fields[1];
  }
  return map;
}

// Identity mapping for stores that skip disambiguation.
inline RevisedIdMap identity_id_map(const RecordStore& store) {
  RevisedIdMap map;
  for (const auto& r : store.records()) {
    map.record_to_revised[r.record_id] = r.author_id;
    map.revised_to_original[r.author_id] = r.author_id;
  }
  return map;
}

}  // namespace scholmig
