#pragma once

#include "moltrap/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace moltrap::csv {

using Cell = std::variant<double, long long, std::string>;

// 12 significant digits in scientific notation with a bare exponent:
// 1/3 -> 3.33333333333e-1, 1500 -> 1.50000000000e3.
inline std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  if (v == 0.0)
    v = 0.0; // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  std::string s(buf);
  const auto e = s.find('e');
  std::string mant = s.substr(0, e);
  std::string exp = s.substr(e + 1);
  bool neg = false;
  std::size_t i = 0;
  if (exp[i] == '+' || exp[i] == '-')
    neg = exp[i++] == '-';
  while (i + 1 < exp.size() && exp[i] == '0')
    ++i;
  return mant + "e" + (neg ? "-" : "") + exp.substr(i);
}

inline std::string format_cell(const Cell &c) {
  if (const auto *d = std::get_if<double>(&c))
    return format_double(*d);
  if (const auto *n = std::get_if<long long>(&c))
    return std::to_string(*n);
  const auto &s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n\r") == std::string::npos)
    return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"')
      q += '"';
    q += ch;
  }
  return q + "\"";
}

struct Table {
  std::vector<std::string> headers;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != headers.size())
      throw InvariantError("csv row has " + std::to_string(row.size()) + " cells for " +
                           std::to_string(headers.size()) + " columns");
    rows.push_back(std::move(row));
  }
};

inline std::string to_string(const Table &t) {
  std::string out;
  for (std::size_t i = 0; i < t.headers.size(); ++i)
    out += (i ? "," : "") + format_cell(t.headers[i]);
  out += '\n';
  for (const auto &row : t.rows) {
    if (row.size() != t.headers.size())
      throw InvariantError("csv table is not rectangular");
    for (std::size_t i = 0; i < row.size(); ++i)
      out += (i ? "," : "") + format_cell(row[i]);
    out += '\n';
  }
  return out;
}

inline void write(const Table &t, const std::filesystem::path &path) {
  const std::string text = to_string(t);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw IoError("cannot open '" + path.string() + "' for writing");
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os)
    throw IoError("failed writing '" + path.string() + "'");
}

} // namespace moltrap::csv
