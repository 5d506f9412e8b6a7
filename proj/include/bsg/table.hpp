#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "bsg/matrix.hpp"

namespace bsg {

/// Shortest round-trip decimal form of a double; deterministic, so repeated
/// runs emit byte-identical files.
inline std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

inline std::string to_string(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

/// Column-named rows of cells; the exchange format of every CLI subcommand.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::vector<Cell>& add_row() { return rows.emplace_back(); }
};

inline void write_csv_field(std::ostream& out, const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i > 0) out << ',';
    write_csv_field(out, table.columns[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      write_csv_field(out, to_string(row[i]));
    }
    out << '\n';
  }
}

/// Channel gains as CSV: one row per player, one column per station.
inline Table channel_table(const Matrix<double>& gains) {
  Table table;
  for (std::size_t s = 0; s < gains.cols(); ++s) {
    table.columns.push_back("bs_" + std::to_string(s + 1));
  }
  for (std::size_t k = 0; k < gains.rows(); ++k) {
    auto& row = table.add_row();
    for (std::size_t s = 0; s < gains.cols(); ++s) {
      row.emplace_back(gains(k, s));
    }
  }
  return table;
}

}  // namespace bsg
