#pragma once

// Minimal comma-separated reader/writer. No quoting: none of the files this
// project reads carry commas inside fields.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gdp/common.hpp"

namespace gdp::csv {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;

  const std::string& at(std::size_t i) const {
    if (i >= fields.size()) throw ParseError("missing column " + std::to_string(i + 1), line);
    return fields[i];
  }
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;
};

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Reads a table and checks the header matches `expected` exactly.
inline Table read(std::istream& in, const std::vector<std::string>& expected) {
  Table t;
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      if (fields != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
        throw ParseError("expected header '" + want + "'", n);
      }
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != expected.size())
      throw ParseError("expected " + std::to_string(expected.size()) + " fields, found " + std::to_string(fields.size()), n);
    t.rows.push_back(Row{n, std::move(fields)});
  }
  if (!have_header) throw ParseError("missing header");
  return t;
}

inline Table read_file(const std::string& path, const std::vector<std::string>& expected) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return read(in, expected);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
}

inline double to_double(const std::string& s, std::size_t line, const char* what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  return v;
}

/// Parses an integer-valued field; "12" and "12.0" are accepted, "12.5" is not.
inline long to_integer(const std::string& s, std::size_t line, const char* what) {
  const double v = to_double(s, line, what);
  if (v != std::floor(v)) throw ParseError(std::string(what) + " must be an integer, got '" + s + "'", line);
  return static_cast<long>(v);
}

/// Shortest round-trippable text for a double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace gdp::csv
