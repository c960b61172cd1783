#include "dpcm/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpcm {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const CsvTable& table, const std::string& path) {
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw std::invalid_argument("csv row width does not match header");
    }
  }
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty csv file: " + path);
  }
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw std::runtime_error("malformed csv value \"" + cell + "\" in " +
                                 path);
      }
      row.push_back(v);
    }
    if (row.size() != table.columns.size()) {
      throw std::runtime_error("csv row width mismatch in " + path);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace dpcm
