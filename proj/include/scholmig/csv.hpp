#pragma once

// Minimal RFC-4180-style CSV reading and writing. Fields are quoted when they
// contain commas, quotes, or line breaks; writers in this project never emit
// embedded line breaks, and the parser works line by line.

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "scholmig/errors.hpp"

namespace scholmig::csv {

inline bool needs_quotes(std::string_view field) {
  return field.find_first_of(",\"\n\r") != std::string_view::npos;
}

inline std::string escape(std::string_view field) {
  if (!needs_quotes(field)) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

inline std::vector<std::string> parse_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c == '\r') {
      // tolerated before end of line
    } else {
      current.push_back(c);
    }
    ++i;
  }
  if (quoted) throw DataError("unterminated quote in CSV line");
  fields.push_back(std::move(current));
  return fields;
}

// List fields inside a single CSV cell are ';'-joined; items must not
// themselves contain ';'.
inline std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(';');
    out += items[i];
  }
  return out;
}

inline std::vector<std::string> split_list(std::string_view cell) {
  std::vector<std::string> items;
  if (cell.empty()) return items;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = cell.find(';', start);
    if (pos == std::string_view::npos) {
      items.emplace_back(cell.substr(start));
      break;
    }
    items.emplace_back(cell.substr(start, pos - start));
    start = pos + 1;
  }
  return items;
}

}  // namespace scholmig::csv
