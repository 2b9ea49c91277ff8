#pragma once

#include <charconv>
#include <string>
#include <string_view>

namespace converse::csv {

// RFC-4180 quoting: fields containing a comma, quote or line break are
// wrapped in quotes with embedded quotes doubled.
inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Fixed-precision decimal, locale independent.
inline std::string number(double v, int precision = 6) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

}  // namespace converse::csv
