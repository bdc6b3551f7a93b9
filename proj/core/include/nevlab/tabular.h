#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace nevlab {

/// "%.17g": shortest text that round-trips every double through strtod.
std::string format_double(double x);

using Column = std::pair<std::string, std::vector<double>>;

/// Comma-separated table with a header row; all columns must have equal length.
void write_table(std::ostream& out, const std::vector<Column>& columns);
std::vector<Column> read_table(std::istream& in);

}  // namespace nevlab
