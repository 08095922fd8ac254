#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <string>

// Internal helpers shared by the text parsers and writers.
namespace sagin::detail {

// Strips '#' comments and surrounding whitespace.
inline std::string strip_line(const std::string& raw) {
  std::string s = raw;
  if (auto pos = s.find('#'); pos != std::string::npos) s.erase(pos);
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct LineReader {
  std::istream& in;
  int line_no = 0;

  // Next non-empty payload line, or false at EOF.
  bool next(std::string& out) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      out = strip_line(raw);
      if (!out.empty()) return true;
    }
    return false;
  }

  // Line to report when input ended before something expected.
  int eof_line() const { return line_no + 1; }
};

// Simulation times live on a 6-decimal grid so that formatting and
// re-parsing a time reproduces the stored double exactly.
inline std::string format_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}

inline double quantize_time(double t) {
  return std::strtod(format_time(t).c_str(), nullptr);
}

}  // namespace sagin::detail
