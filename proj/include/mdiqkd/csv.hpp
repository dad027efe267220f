#pragma once

#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace mdiqkd {

/// Shortest round-trip-safe rendering used by every CSV writer.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* format_bool(bool b) { return b ? "true" : "false"; }

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace mdiqkd
