#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nlspec/cli.hpp"
#include "nlspec/error.hpp"

namespace nlspec::cli {
namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, const std::filesystem::path& p, std::size_t row) {
  if (s == "nan" || s == "-nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0')
    throw SchemaMismatch(p.string() + ": row " + std::to_string(row) + " has non-numeric cell '" + s + "'");
  return x;
}

Table read_table(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw SchemaMismatch("cannot read " + p.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch(p.string() + " is empty");
  t.header = split(line);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw SchemaMismatch(p.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(t.header.size()));
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(parse_cell(c, p, row));
    t.rows.push_back(std::move(r));
  }
  return t;
}

double deviation(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b) ? 0.0 : INFINITY;
  if (a == b) return 0.0;
  return std::abs(a - b);
}

}  // namespace

Tolerances load_tolerances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read tolerance file " + path.string());
  Tolerances t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string col, tol, extra;
    if (!(ls >> col)) continue;
    char* end = nullptr;
    if (!(ls >> tol) || (ls >> extra)) throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected 'column tolerance'");
    const double v = std::strtod(tol.c_str(), &end);
    if (*end != '\0' || !(v >= 0.0)) throw ConfigError(path.string() + ":" + std::to_string(n) + ": bad tolerance '" + tol + "'");
    if (col == "*") t.fallback = v;
    else t.columns[col] = v;
  }
  return t;
}

CompareReport compare_traces(const std::filesystem::path& a, const std::filesystem::path& b, const Tolerances& tol) {
  const Table A = read_table(a), B = read_table(b);
  if (A.header != B.header) throw SchemaMismatch("headers of " + a.string() + " and " + b.string() + " differ");
  if (A.rows.size() != B.rows.size())
    throw SchemaMismatch(a.string() + " has " + std::to_string(A.rows.size()) + " rows, " + b.string() + " has " +
                         std::to_string(B.rows.size()));
  for (const auto& [col, v] : tol.columns) {
    (void)v;
    if (std::find(A.header.begin(), A.header.end(), col) == A.header.end())
      throw SchemaMismatch("tolerance given for unknown column '" + col + "'");
  }
  CompareReport rep;
  for (std::size_t c = 0; c < A.header.size(); ++c) {
    ColumnDeviation d;
    d.column = A.header[c];
    auto it = tol.columns.find(d.column);
    d.tolerance = it == tol.columns.end() ? tol.fallback : it->second;
    for (std::size_t r = 0; r < A.rows.size(); ++r) {
      const double dev = deviation(A.rows[r][c], B.rows[r][c]);
      if (dev > d.max_deviation) d.max_deviation = dev, d.worst_row = r + 1;
      if (dev > d.tolerance)
        rep.failures.push_back("row " + std::to_string(r + 1) + " column " + d.column + ": " + format_number(A.rows[r][c]) +
                               " vs " + format_number(B.rows[r][c]));
    }
    rep.columns.push_back(d);
  }
  rep.passed = rep.failures.empty();
  return rep;
}

}  // namespace nlspec::cli
