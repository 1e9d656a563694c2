#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "scholmig/record.hpp"

namespace testutil {

inline scholmig::AuthorshipRecord make_record(
    std::string record_id, std::string author_id, int year, std::string name,
    std::string country = "DE", std::string city = "Rostock") {
  scholmig::AuthorshipRecord r;
  r.record_id = std::move(record_id);
  r.author_id = std::move(author_id);
  r.publication_id = "pub-" + r.record_id;
  r.year = year;
  r.author_full_name = std::move(name);
  r.affiliation.city = std::move(city);
  r.affiliation.institution = "Institute of Research";
  r.affiliation.address_line = "1 Main Street";
  if (!country.empty()) r.affiliation.country = country;
  r.journal_title = "Journal of Studies";
  r.publication_title = "A Study";
  return r;
}

inline std::string record_jsonl_line(const scholmig::AuthorshipRecord& r) {
  return scholmig::record_to_json(r).dump();
}

inline scholmig::RecordStore parse_jsonl(const std::string& text,
                                         std::vector<scholmig::Reject>* rejects = nullptr) {
  std::istringstream is(text);
  auto result = scholmig::parse_records(is, scholmig::RecordFormat::jsonl);
  if (rejects) *rejects = result.rejects;
  return std::move(result.store);
}

}  // namespace testutil
