#pragma once

// ISO 3166-1 alpha-2 validation and an embedded English country-name table
// used to normalize raw affiliation country strings at parse time.

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "scholmig/text.hpp"

namespace scholmig::countries {

inline constexpr std::string_view kGermany = "DE";

inline const std::unordered_set<std::string>& alpha2_codes() {
  static const std::unordered_set<std::string> codes = {
      "AD", "AE", "AF", "AG", "AI", "AL", "AM", "AO", "AQ", "AR", "AS", "AT", "AU",
      "AW", "AX", "AZ", "BA", "BB", "BD", "BE", "BF", "BG", "BH", "BI", "BJ", "BL",
      "BM", "BN", "BO", "BQ", "BR", "BS", "BT", "BV", "BW", "BY", "BZ", "CA", "CC",
      "CD", "CF", "CG", "CH", "CI", "CK", "CL", "CM", "CN", "CO", "CR", "CU", "CV",
      "CW", "CX", "CY", "CZ", "DE", "DJ", "DK", "DM", "DO", "DZ", "EC", "EE", "EG",
      "EH", "ER", "ES", "ET", "FI", "FJ", "FK", "FM", "FO", "FR", "GA", "GB", "GD",
      "GE", "GF", "GG", "GH", "GI", "GL", "GM", "GN", "GP", "GQ", "GR", "GS", "GT",
      "GU", "GW", "GY", "HK", "HM", "HN", "HR", "HT", "HU", "ID", "IE", "IL", "IM",
      "IN", "IO", "IQ", "IR", "IS", "IT", "JE", "JM", "JO", "JP", "KE", "KG", "KH",
      "KI", "KM", "KN", "KP", "KR", "KW", "KY", "KZ", "LA", "LB", "LC", "LI", "LK",
      "LR", "LS", "LT", "LU", "LV", "LY", "MA", "MC", "MD", "ME", "MF", "MG", "MH",
      "MK", "ML", "MM", "MN", "MO", "MP", "MQ", "MR", "MS", "MT", "MU", "MV", "MW",
      "MX", "MY", "MZ", "NA", "NC", "NE", "NF", "NG", "NI", "NL", "NO", "NP", "NR",
      "NU", "NZ", "OM", "PA", "PE", "PF", "PG", "PH", "PK", "PL", "PM", "PN", "PR",
      "PS", "PT", "PW", "PY", "QA", "RE", "RO", "RS", "RU", "RW", "SA", "SB", "SC",
      "SD", "SE", "SG", "SH", "SI", "SJ", "SK", "SL", "SM", "SN", "SO", "SR", "SS",
      "ST", "SV", "SX", "SY", "SZ", "TC", "TD", "TF", "TG", "TH", "TJ", "TK", "TL",
      "TM", "TN", "TO", "TR", "TT", "TV", "TW", "TZ", "UA", "UG", "UM", "US", "UY",
      "UZ", "VA", "VC", "VE", "VG", "VI", "VN", "VU", "WF", "WS", "YE", "YT", "ZA",
      "ZM", "ZW",
  };
  return codes;
}

inline bool is_alpha2(std::string_view code) {
  if (code.size() != 2) return false;
  std::string upper;
  upper.reserve(2);
  for (char c : code) upper.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c);
  return alpha2_codes().count(upper) > 0;
}

inline const std::unordered_map<std::string, std::string>& name_to_code() {
  static const std::unordered_map<std::string, std::string> names = {
      {"germany", "DE"}, {"united states", "US"}, {"united states of america", "US"},
      {"usa", "US"}, {"united kingdom", "GB"}, {"uk", "GB"}, {"great britain", "GB"},
      {"england", "GB"}, {"scotland", "GB"}, {"wales", "GB"}, {"switzerland", "CH"},
      {"france", "FR"}, {"netherlands", "NL"}, {"the netherlands", "NL"},
      {"austria", "AT"}, {"sweden", "SE"}, {"australia", "AU"}, {"canada", "CA"},
      {"italy", "IT"}, {"spain", "ES"}, {"china", "CN"}, {"peoples republic of china", "CN"},
      {"japan", "JP"}, {"south korea", "KR"}, {"republic of korea", "KR"}, {"korea", "KR"},
      {"india", "IN"}, {"brazil", "BR"}, {"russia", "RU"}, {"russian federation", "RU"},
      {"poland", "PL"}, {"denmark", "DK"}, {"norway", "NO"}, {"finland", "FI"},
      {"belgium", "BE"}, {"czech republic", "CZ"}, {"czechia", "CZ"}, {"portugal", "PT"},
      {"greece", "GR"}, {"hungary", "HU"}, {"ireland", "IE"}, {"israel", "IL"},
      {"turkey", "TR"}, {"mexico", "MX"}, {"argentina", "AR"}, {"chile", "CL"},
      {"south africa", "ZA"}, {"new zealand", "NZ"}, {"singapore", "SG"},
      {"taiwan", "TW"}, {"hong kong", "HK"}, {"ukraine", "UA"}, {"romania", "RO"},
      {"bulgaria", "BG"}, {"croatia", "HR"}, {"slovakia", "SK"}, {"slovenia", "SI"},
      {"estonia", "EE"}, {"latvia", "LV"}, {"lithuania", "LT"}, {"luxembourg", "LU"},
      {"iceland", "IS"}, {"serbia", "RS"}, {"egypt", "EG"}, {"saudi arabia", "SA"},
      {"united arab emirates", "AE"}, {"iran", "IR"}, {"thailand", "TH"},
      {"vietnam", "VN"}, {"viet nam", "VN"}, {"indonesia", "ID"}, {"malaysia", "MY"},
      {"philippines", "PH"}, {"pakistan", "PK"}, {"bangladesh", "BD"},
      {"nigeria", "NG"}, {"kenya", "KE"}, {"colombia", "CO"}, {"peru", "PE"},
      {"venezuela", "VE"}, {"cuba", "CU"}, {"cyprus", "CY"}, {"malta", "MT"},
      {"belarus", "BY"}, {"georgia", "GE"}, {"armenia", "AM"}, {"azerbaijan", "AZ"},
      {"kazakhstan", "KZ"}, {"uzbekistan", "UZ"}, {"morocco", "MA"}, {"tunisia", "TN"},
      {"algeria", "DZ"}, {"ethiopia", "ET"}, {"ghana", "GH"}, {"uruguay", "UY"},
      {"ecuador", "EC"}, {"bolivia", "BO"}, {"costa rica", "CR"}, {"panama", "PA"},
      {"jordan", "JO"}, {"lebanon", "LB"}, {"kuwait", "KW"}, {"qatar", "QA"},
      {"oman", "OM"}, {"bahrain", "BH"}, {"iraq", "IQ"}, {"syria", "SY"},
      {"nepal", "NP"}, {"sri lanka", "LK"}, {"myanmar", "MM"}, {"cambodia", "KH"},
      {"mongolia", "MN"}, {"north korea", "KP"}, {"albania", "AL"},
      {"north macedonia", "MK"}, {"macedonia", "MK"}, {"bosnia and herzegovina", "BA"},
      {"montenegro", "ME"}, {"moldova", "MD"}, {"monaco", "MC"}, {"liechtenstein", "LI"},
      {"andorra", "AD"}, {"san marino", "SM"}, {"greenland", "GL"},
  };
  return names;
}

// Accepts an alpha-2 code (any case) or a common English country name and
// returns the canonical upper-case alpha-2 code.
inline std::optional<std::string> normalize(std::string_view raw) {
  if (raw.empty()) return std::nullopt;
  if (raw.size() == 2) {
    std::string upper;
    for (char c : raw) upper.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c);
    if (alpha2_codes().count(upper)) return upper;
  }
  std::string folded = text::fold_lower(raw);
  // collapse runs of whitespace and trim
  std::string cleaned;
  bool in_space = true;
  for (char c : folded) {
    if (c == ' ' || c == '\t') {
      if (!in_space) cleaned.push_back(' ');
      in_space = true;
    } else {
      cleaned.push_back(c);
      in_space = false;
    }
  }
  while (!cleaned.empty() && cleaned.back() == ' ') cleaned.pop_back();
  const auto it = name_to_code().find(cleaned);
  if (it != name_to_code().end()) return it->second;
  return std::nullopt;
}

}  // namespace scholmig::countries
