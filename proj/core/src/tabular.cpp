#include "nevlab/tabular.h"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "nevlab/errors.h"

namespace nevlab {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_table(std::ostream& out, const std::vector<Column>& columns) {
  if (columns.empty()) return;
  const std::size_t rows = columns.front().second.size();
  for (const auto& c : columns)
    if (c.second.size() != rows) throw Error(Errc::io, "column '" + c.first + "' has a different length");
  for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << columns[k].first;
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << format_double(columns[k].second[i]);
    out << '\n';
  }
}

std::vector<Column> read_table(std::istream& in) {
  std::vector<Column> columns;
  std::string line;
  if (!std::getline(in, line)) return columns;
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) columns.push_back({cell, {}});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::size_t k = 0;
    while (std::getline(row, cell, ',')) {
      if (k >= columns.size()) throw Error(Errc::io, "ragged table row");
      columns[k++].second.push_back(std::stod(cell));
    }
    if (k != columns.size()) throw Error(Errc::io, "ragged table row");
  }
  return columns;
}

}  // namespace nevlab
