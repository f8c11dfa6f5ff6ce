#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lograd/errors.hpp"

namespace lograd::bench {

// Empty cell (e.g. a ratio against a zero optimum) is std::monostate.
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, Cell>> summary;
  // Set when a run hit a numerical failure (diverged training); rows are kept.
  bool numerical_failure = false;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
      throw DimensionError("Table: row with " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw InvalidArgument("Table: no column '" + name + "'");
  }
};

inline Cell cell(std::size_t v) { return static_cast<std::uint64_t>(v); }
inline Cell cell(double v) { return v; }
inline Cell cell(const std::string& v) { return v; }
inline Cell cell(const char* v) { return std::string(v); }
inline Cell cell(bool v) { return v; }

// Shortest round-trip text for doubles; locale independent.
inline std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(double v) const {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof(buf), v);
      return std::string(buf, res.ptr);
    }
  };
  return std::visit(Visitor{}, c);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

// Header row then one line per row, columns in table order.
inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(format_cell(row[i]));
    os << "\n";
  }
}

}  // namespace lograd::bench
