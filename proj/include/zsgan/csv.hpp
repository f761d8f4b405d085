#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "zsgan/errors.hpp"
#include "zsgan/matrix.hpp"

namespace zsgan {

/// Shortest text form that parses back to the identical double (%.17g).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_fields(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& file, std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw LoadError(file + ":" + std::to_string(line_no) + ": not a number: '" + s + "'");
  }
  if (pos != s.size())
    throw LoadError(file + ":" + std::to_string(line_no) + ": trailing junk in '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s, const std::string& file, std::size_t line_no) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    throw LoadError(file + ":" + std::to_string(line_no) + ": not an integer: '" + s + "'");
  }
  if (pos != s.size())
    throw LoadError(file + ":" + std::to_string(line_no) + ": trailing junk in '" + s + "'");
  return v;
}

/// Headerless numeric CSV into a matrix; every line must have the same width.
inline Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path + ": cannot open");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) row.push_back(parse_double(f, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw LoadError(path + ":" + std::to_string(line_no) + ": ragged row, expected " +
                      std::to_string(rows.front().size()) + " fields, got " +
                      std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  return m;
}

inline std::vector<long> read_csv_longs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path + ": cannot open");
  std::vector<long> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 1)
      throw LoadError(path + ":" + std::to_string(line_no) + ": expected one field per line");
    out.push_back(parse_long(fields[0], path, line_no));
  }
  return out;
}

inline void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError(path + ": write failed");
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace zsgan
