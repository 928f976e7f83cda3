#pragma once

#include "bincomp/common.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace bincomp {

enum class TableFormat { csv, tsv };

inline char delimiter_of(TableFormat fmt) { return fmt == TableFormat::csv ? ',' : '\t'; }

/// Picks tsv for a ".tsv" extension, csv otherwise.
inline TableFormat format_from_path(const std::string& path) {
  const std::string ext = ".tsv";
  if (path.size() >= ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
    return TableFormat::tsv;
  return TableFormat::csv;
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + s.size();
}

}  // namespace detail

/// Reads a rectangular numeric grid. A single leading header row is skipped
/// when any of its fields fails to parse as a number.
inline Matrix read_matrix(const std::string& path, TableFormat fmt) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  const char delim = delimiter_of(fmt);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_checked = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_fields(line, delim);
    std::vector<double> row(fields.size());
    bool ok = true;
    std::size_t bad_col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!detail::parse_double(fields[c], row[c])) {
        ok = false;
        bad_col = c;
        break;
      }
    }
    if (!ok) {
      if (!header_checked && rows.empty()) {
        header_checked = true;  // treat the first non-numeric row as a header
        continue;
      }
      throw ParseError(path + ": row " + std::to_string(line_no) + ", column " +
                       std::to_string(bad_col + 1) + ": cannot parse '" + fields[bad_col] + "'");
    }
    header_checked = true;
    if (!rows.empty() && row.size() != rows.front().size())
      throw RaggedRows(path + ": row " + std::to_string(line_no) + " has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no numeric rows");

  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return M;
}

inline Matrix read_matrix(const std::string& path) { return read_matrix(path, format_from_path(path)); }

/// Formats a double at 17 significant digits (lossless round trip).
inline std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_matrix(const Matrix& M, std::ostream& out, TableFormat fmt) {
  const char delim = delimiter_of(fmt);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j > 0) out << delim;
      out << format_value(M(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix(const Matrix& M, const std::string& path, TableFormat fmt) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  write_matrix(M, out, fmt);
}

inline void write_matrix(const Matrix& M, const std::string& path) {
  write_matrix(M, path, format_from_path(path));
}

}  // namespace bincomp
