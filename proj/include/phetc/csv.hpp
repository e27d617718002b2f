#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace phetc {

/// Minimal CSV table: one header row, comma separated, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws Error when absent.
  std::size_t columnIndex(const std::string& name) const;
  /// Numeric column; empty cells and "-" become NaN.
  std::vector<double> numericColumn(const std::string& name) const;
};

/// Shortest text that round-trips to the same double.
std::string format_number(double value);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace phetc
