#ifndef DPCM_CSV_HPP
#define DPCM_CSV_HPP

#include <string>
#include <vector>

namespace dpcm {

/// Numeric table with a header row.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // each row.size() == columns.size()
};

/// Writes RFC-4180-style CSV: header row, '.' decimal separator, 17
/// significant digits (round-trip exact), LF line endings. Throws
/// std::runtime_error on I/O failure, std::invalid_argument on a row/schema
/// width mismatch.
void write_csv(const CsvTable& table, const std::string& path);

/// Reads a file produced by write_csv. Throws on malformed input.
CsvTable read_csv(const std::string& path);

/// The serialization used per value ("%.17g").
std::string format_double(double x);

}  // namespace dpcm

#endif
