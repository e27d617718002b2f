#include "phetc/csv.hpp"

#include "phetc/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace phetc {

std::size_t CsvTable::columnIndex(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(fmt::format("missing CSV column '{}'", name));
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numericColumn(const std::string& name) const {
  const std::size_t idx = columnIndex(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string& cell = row.at(idx);
    if (cell.empty() || cell == "-") {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      out.push_back(std::stod(cell));
    }
  }
  return out;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  return fmt::format("{}", value);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw Error("CSV row width differs from header");
    emit(row);
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw Error(fmt::format("{} is empty", path.string()));
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != table.header.size()) {
      throw Error(fmt::format("{}: row width {} differs from header width {}", path.string(),
                              row.size(), table.header.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace phetc
