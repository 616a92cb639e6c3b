#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "deepo/error.hpp"

namespace deepo::detail {

/// Fixed-point decimal with 9 significant digits (no exponent notation).
inline std::string format_decimal(double v) {
  if (v == 0.0 || !std::isfinite(v)) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return "0";
  }
  int exponent = static_cast<int>(std::floor(std::log10(std::fabs(v))));
  int decimals = 8 - exponent;
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", std::max(decimals, 0), v);
  // Rounding can carry into a new leading digit (9.9999999996 -> 10.00000000).
  std::string s(buf);
  std::size_t digits = 0;
  bool leading = true;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      if (leading && c == '0') continue;
      leading = false;
      ++digits;
    }
  }
  if (digits > 9 && decimals > 0) {
    std::snprintf(buf, sizeof buf, "%.*f", decimals - 1, v);
    s = buf;
  }
  return s;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    std::string_view cell = line.substr(start, pos == std::string_view::npos ? line.npos : pos - start);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    out.emplace_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& cell) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw Error(ErrorKind::Parse, "not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace deepo::detail
