#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "../errors.hpp"

namespace bgp::harness {

/// Ten significant digits; "nan" for NaN.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(unsigned long long v) { return std::to_string(v); }
inline std::string fmt(unsigned long v) { return std::to_string(v); }
inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  template <class... Ts>
  void add(const Ts&... values) {
    std::vector<std::string> row{fmt(values)...};
    if (row.size() != columns.size()) throw Error("csv: row width does not match header");
    rows.push_back(std::move(row));
  }

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    throw Error("csv: no column '" + name + "'");
  }
};

/// Header block lines are written as "# " comments before the column row.
inline std::string render_csv(const CsvTable& t, const std::vector<std::string>& header_block) {
  std::ostringstream os;
  for (const auto& line : header_block) os << "# " << line << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace bgp::harness
