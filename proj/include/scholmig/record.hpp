#pragma once

// Canonical data model for authorship records: one row links an author, a
// publication, and an affiliation address. Parsing validates rows against the
// observation window and schema, normalizes country strings to alpha-2 codes,
// and indexes the surviving records by author and by (author, year).

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scholmig/countries.hpp"
#include "scholmig/csv.hpp"
#include "scholmig/errors.hpp"

namespace scholmig {

inline constexpr int kWindowStartYear = 1996;
inline constexpr int kWindowEndYear = 2020;

struct Affiliation {
  std::string institution;
  std::string city;
  std::string address_line;
  std::optional<std::string> country;  // alpha-2 when present

  bool operator==(const Affiliation&) const = default;

  std::string text() const {
    std::string out = institution;
    if (!city.empty()) {
      if (!out.empty()) out.push_back(' ');
      out += city;
    }
    if (!address_line.empty()) {
      if (!out.empty()) out.push_back(' ');
      out += address_line;
    }
    return out;
  }
};

struct AuthorshipRecord {
  std::string record_id;
  std::string author_id;
  std::string publication_id;
  int year = 0;
  std::string author_full_name;
  std::vector<std::string> coauthor_names;
  Affiliation affiliation;
  std::string journal_title;
  std::string publication_title;
  std::vector<std::string> keywords;
  std::vector<std::string> subject_tags;
  std::vector<std::string> funding_texts;
  std::vector<std::string> grant_numbers;

  bool operator==(const AuthorshipRecord&) const = default;
};

struct Reject {
  std::size_t line = 0;
  std::string reason;

  bool operator==(const Reject&) const = default;
};

enum class RecordFormat { jsonl, csv };

// Immutable after construction; concurrent read-only access is safe.
class RecordStore {
 public:
  RecordStore() = default;

  static RecordStore from_records(std::vector<AuthorshipRecord> records) {
    RecordStore store;
    store.records_ = std::move(records);
    store.rebuild_indexes();
    return store;
  }

  const std::vector<AuthorshipRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  const std::map<std::string, std::vector<std::string>>& author_index() const {
    return author_index_;
  }
  const std::map<std::pair<std::string, int>, std::vector<std::string>>& year_index() const {
    return year_index_;
  }

  bool contains(const std::string& record_id) const { return by_id_.count(record_id) > 0; }

  const AuthorshipRecord& by_id(const std::string& record_id) const {
    const auto it = by_id_.find(record_id);
    if (it == by_id_.end()) throw DataError("unknown record_id: " + record_id);
    return records_[it->second];
  }

  std::vector<const AuthorshipRecord*> records_of_author(const std::string& author_id) const {
    std::vector<const AuthorshipRecord*> out;
    const auto it = author_index_.find(author_id);
    if (it == author_index_.end()) return out;
    out.reserve(it->second.size());
    for (const auto& rid : it->second) out.push_back(&by_id(rid));
    return out;
  }

  bool operator==(const RecordStore& other) const { return records_ == other.records_; }

 private:
  void rebuild_indexes() {
    author_index_.clear();
    year_index_.clear();
    by_id_.clear();
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      by_id_.emplace(r.record_id, i);
      author_index_[r.author_id].push_back(r.record_id);
      year_index_[{r.author_id, r.year}].push_back(r.record_id);
    }
  }

  std::vector<AuthorshipRecord> records_;
  std::map<std::string, std::vector<std::string>> author_index_;
  std::map<std::pair<std::string, int>, std::vector<std::string>> year_index_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct ParseResult {
  RecordStore store;
  std::vector<Reject> rejects;
};

namespace detail {

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "record_id",   "author_id",     "publication_id", "year",
      "author_full_name", "coauthor_names", "institution",   "city",
      "address_line", "country",       "journal_title",  "publication_title",
      "keywords",    "subject_tags",  "funding_texts",  "grant_numbers"};
  return cols;
}

// Validation shared by both formats; returns a reject reason or empty.
inline std::string validate_record(AuthorshipRecord& r, const std::string& raw_country,
                                   bool country_present) {
  if (r.year < kWindowStartYear || r.year > kWindowEndYear) return "year out of window";
  if (r.record_id.empty()) return "empty record_id";
  if (r.author_id.empty()) return "empty author_id";
  if (r.publication_id.empty()) return "empty publication_id";
  if (r.author_full_name.empty()) return "empty author_full_name";
  if (r.affiliation.institution.empty() && r.affiliation.city.empty() &&
      r.affiliation.address_line.empty()) {
    return "empty affiliation";
  }
  if (country_present) {
    const auto code = countries::normalize(raw_country);
    if (!code) return "unrecognized country: " + raw_country;
    r.affiliation.country = *code;
  } else {
    r.affiliation.country = std::nullopt;
  }
  return {};
}

inline std::string parse_jsonl_row(const std::string& line, AuthorshipRecord& out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    return "malformed json";
  }
  if (!j.is_object()) return "row is not an object";

  static const std::vector<std::string> expected = {
      "record_id",   "author_id", "publication_id", "year",
      "author_full_name", "coauthor_names", "affiliation", "journal_title",
      "publication_title", "keywords", "subject_tags", "funding_texts",
      "grant_numbers"};
  for (const auto& item : j.items()) {
    bool known = false;
    for (const auto& k : expected) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) return "unexpected key: " + item.key();
  }

  const auto get_string = [&](const nlohmann::json& obj, const char* key, std::string& dst) {
    if (!obj.contains(key) || !obj[key].is_string()) return false;
    dst = obj[key].get<std::string>();
    return true;
  };
  const auto get_list = [&](const char* key, std::vector<std::string>& dst) {
    if (!j.contains(key) || !j[key].is_array()) return false;
    dst.clear();
    for (const auto& v : j[key]) {
      if (!v.is_string()) return false;
      dst.push_back(v.get<std::string>());
    }
    return true;
  };

  if (!get_string(j, "record_id", out.record_id)) return "missing or invalid field: record_id";
  if (!get_string(j, "author_id", out.author_id)) return "missing or invalid field: author_id";
  if (!get_string(j, "publication_id", out.publication_id))
    return "missing or invalid field: publication_id";
  if (!j.contains("year") || !j["year"].is_number_integer())
    return "missing or invalid field: year";
  out.year = j["year"].get<int>();
  if (!get_string(j, "author_full_name", out.author_full_name))
    return "missing or invalid field: author_full_name";
  if (!get_list("coauthor_names", out.coauthor_names))
    return "missing or invalid field: coauthor_names";
  if (!j.contains("affiliation") || !j["affiliation"].is_object())
    return "missing or invalid field: affiliation";
  const auto& aff = j["affiliation"];
  if (!get_string(aff, "institution", out.affiliation.institution))
    return "missing or invalid field: affiliation.institution";
  if (!get_string(aff, "city", out.affiliation.city))
    return "missing or invalid field: affiliation.city";
  if (!get_string(aff, "address_line", out.affiliation.address_line))
    return "missing or invalid field: affiliation.address_line";
  std::string raw_country;
  bool country_present = false;
  if (!aff.contains("country")) return "missing or invalid field: affiliation.country";
  if (aff["country"].is_string()) {
    raw_country = aff["country"].get<std::string>();
    country_present = !raw_country.empty();
  } else if (!aff["country"].is_null()) {
    return "missing or invalid field: affiliation.country";
  }
  if (!get_string(j, "journal_title", out.journal_title))
    return "missing or invalid field: journal_title";
  if (!get_string(j, "publication_title", out.publication_title))
    return "missing or invalid field: publication_title";
  if (!get_list("keywords", out.keywords)) return "missing or invalid field: keywords";
  if (!get_list("subject_tags", out.subject_tags))
    return "missing or invalid field: subject_tags";
  if (!get_list("funding_texts", out.funding_texts))
    return "missing or invalid field: funding_texts";
  if (!get_list("grant_numbers", out.grant_numbers))
    return "missing or invalid field: grant_numbers";

  return validate_record(out, raw_country, country_present);
}

inline std::string parse_csv_row(const std::string& line, AuthorshipRecord& out) {
  std::vector<std::string> fields;
  try {
    fields = csv::parse_line(line);
  } catch (const DataError&) {
    return "malformed csv";
  }
  if (fields.size() != csv_columns().size()) return "wrong column count";
  out.record_id = fields[0];
  out.author_id = fields[1];
  out.publication_id = fields[2];
  try {
    std::size_t pos = 0;
    out.year = std::stoi(fields[3], &pos);
    if (pos != fields[3].size()) return "missing or invalid field: year";
  } catch (const std::exception&) {
    return "missing or invalid field: year";
  }
  out.author_full_name = fields[4];
  out.coauthor_names = csv::split_list(fields[5]);
  out.affiliation.institution = fields[6];
  out.affiliation.city = fields[7];
  out.affiliation.address_line = fields[8];
  const std::string raw_country = fields[9];
  out.journal_title = fields[10];
  out.publication_title = fields[11];
  out.keywords = csv::split_list(fields[12]);
  out.subject_tags = csv::split_list(fields[13]);
  out.funding_texts = csv::split_list(fields[14]);
  out.grant_numbers = csv::split_list(fields[15]);
  return validate_record(out, raw_country, !raw_country.empty());
}

}  // namespace detail

// Single-pass, order-preserving parse. Malformed rows land in the rejects
// report with their 1-based line numbers; duplicate record ids reject the
// later row. Throws IoError on an unreadable stream and DataError when more
// than half of the data rows are rejected.
inline ParseResult parse_records(std::istream& in, RecordFormat format) {
  if (!in.good()) throw IoError("unreadable input stream");

  ParseResult result;
  std::vector<AuthorshipRecord> accepted;
  std::unordered_map<std::string, std::size_t> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_rows = 0;
  bool header_checked = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (format == RecordFormat::csv && !header_checked) {
      header_checked = true;
      const auto header = csv::parse_line(line);
      if (header != detail::csv_columns()) {
        throw DataError("csv header does not match the declared schema");
      }
      continue;
    }
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    ++data_rows;

    AuthorshipRecord rec;
    std::string reason = format == RecordFormat::jsonl
                             ? detail::parse_jsonl_row(line, rec)
                             : detail::parse_csv_row(line, rec);
    if (reason.empty() && seen_ids.count(rec.record_id)) reason = "duplicate record_id";
    if (!reason.empty()) {
      result.rejects.push_back({line_no, reason});
      continue;
    }
    seen_ids.emplace(rec.record_id, accepted.size());
    accepted.push_back(std::move(rec));
  }
  if (in.bad()) throw IoError("I/O failure while reading input");
  if (data_rows > 0 && result.rejects.size() * 2 > data_rows) {
    throw DataError("schema mismatch: " + std::to_string(result.rejects.size()) + " of " +
                    std::to_string(data_rows) + " rows rejected");
  }
  result.store = RecordStore::from_records(std::move(accepted));
  return result;
}

inline nlohmann::ordered_json record_to_json(const AuthorshipRecord& r) {
  nlohmann::ordered_json j;
  j["record_id"] = r.record_id;
  j["author_id"] = r.author_id;
  j["publication_id"] = r.publication_id;
  j["year"] = r.year;
  j["author_full_name"] = r.author_full_name;
  j["coauthor_names"] = r.coauthor_names;
  nlohmann::ordered_json aff;
  aff["institution"] = r.affiliation.institution;
  aff["city"] = r.affiliation.city;
  aff["address_line"] = r.affiliation.address_line;
  if (r.affiliation.country) {
    aff["country"] = *r.affiliation.country;
  } else {
    aff["country"] = nullptr;
  }
  j["affiliation"] = std::move(aff);
  j["journal_title"] = r.journal_title;
  j["publication_title"] = r.publication_title;
  j["keywords"] = r.keywords;
  j["subject_tags"] = r.subject_tags;
  j["funding_texts"] = r.funding_texts;
  j["grant_numbers"] = r.grant_numbers;
  return j;
}

inline void serialize_records(const RecordStore& store, std::ostream& out, RecordFormat format) {
  if (format == RecordFormat::jsonl) {
    for (const auto& r : store.records()) {
      out << record_to_json(r).dump() << '\n';
    }
    return;
  }
  out << csv::join_row(detail::csv_columns());
  for (const auto& r : store.records()) {
    out << csv::join_row({r.record_id, r.author_id, r.publication_id, std::to_string(r.year),
                          r.author_full_name, csv::join_list(r.coauthor_names),
                          r.affiliation.institution, r.affiliation.city,
                          r.affiliation.address_line,
                          r.affiliation.country ? *r.affiliation.country : std::string(),
                          r.journal_title, r.publication_title, csv::join_list(r.keywords),
                          csv::join_list(r.subject_tags), csv::join_list(r.funding_texts),
                          csv::join_list(r.grant_numbers)});
  }
}

inline std::string rejects_to_jsonl(const std::vector<Reject>& rejects) {
  std::string out;
  for (const auto& r : rejects) {
    nlohmann::ordered_json j;
    j["line"] = r.line;
    j["reason"] = r.reason;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

// Record ids whose affiliation country is absent, in store order.
inline std::vector<std::string> missing_country_records(const RecordStore& store) {
  std::vector<std::string> ids;
  for (const auto& r : store.records()) {
    if (!r.affiliation.country) ids.push_back(r.record_id);
  }
  return ids;
}

}  // namespace scholmig
