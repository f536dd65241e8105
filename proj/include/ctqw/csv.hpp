#pragma once

#include <charconv>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "ctqw/errors.hpp"
#include "ctqw/metrics.hpp"

namespace ctqw {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc{}) throw InvalidArgument("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

inline std::string metrics_csv_header(std::size_t n, bool emit_occupations) {
  std::string h = "t,l1_coherence,fidelity,entropy,d_qc";
  if (emit_occupations)
    for (std::size_t k = 0; k < n; ++k) h += ",p_" + std::to_string(k);
  return h;
}

inline void write_metrics_row(std::ostream& os, const MetricRecord& r, bool emit_occupations) {
  os << format_double(r.t) << ',' << format_double(r.l1_coherence) << ',' << format_double(r.fidelity_with_initial)
     << ',' << format_double(r.entropy) << ',' << format_double(r.d_qc);
  if (emit_occupations)
    for (double p : r.occupations) os << ',' << format_double(p);
  os << '\n';
}

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricRecord>& records, bool emit_occupations) {
  const std::size_t n = records.empty() ? 0 : records.front().occupations.size();
  os << metrics_csv_header(n, emit_occupations) << '\n';
  for (const auto& r : records) write_metrics_row(os, r, emit_occupations);
}

/// Numeric CSV with a header row; columns addressable by name.
class CsvTable {
public:
  static CsvTable parse(std::istream& is) {
    CsvTable table;
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("csv: empty input");
    table.names_ = split(strip(line));
    if (table.names_.empty() || table.names_.front().empty()) throw InvalidArgument("csv: missing header");
    table.columns_.assign(table.names_.size(), {});
    std::size_t row = 1;
    while (std::getline(is, line)) {
      ++row;
      line = strip(line);
      if (line.empty()) continue;
      const auto cells = split(line);
      if (cells.size() != table.names_.size())
        throw InvalidArgument("csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                              " cells, header has " + std::to_string(table.names_.size()));
      for (std::size_t c = 0; c < cells.size(); ++c) {
        double x = 0.0;
        const auto* first = cells[c].data();
        const auto* last = first + cells[c].size();
        const auto res = std::from_chars(first, last, x);
        if (res.ec != std::errc{} || res.ptr != last)
          throw InvalidArgument("csv: row " + std::to_string(row) + " column '" + table.names_[c] +
                                "' is not a number: '" + cells[c] + "'");
        table.columns_[c].push_back(x);
      }
    }
    return table;
  }

  bool has(const std::string& name) const {
    for (const auto& n : names_)
      if (n == name) return true;
    return false;
  }

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return columns_[i];
    throw InvalidArgument("csv: no column named '" + name + "'");
  }

  const std::vector<std::string>& names() const noexcept { return names_; }

private:
  static std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  }

  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

} // namespace ctqw
