#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gpkmd::csv {

/// A rectangular numeric table, one row per record.
struct NumericTable {
  std::vector<std::string> header;  // empty when the input had no header row
  std::vector<std::vector<double>> rows;
};

/// Parses comma-separated numeric text. A first row in which no cell is
/// numeric is taken as a header. Blank lines are skipped, CRLF is accepted.
/// Throws ParseError (with the 1-based line number) on ragged rows,
/// non-numeric cells or non-finite values.
NumericTable parse_numeric(std::string_view text);

/// Shortest round-trip decimal representation; "nan"/"inf"/"-inf" otherwise.
std::string format(double value);

/// Writes one CSV line (no quoting; cells must not contain commas).
void write_row(std::ostream& out, const std::vector<std::string>& cells);
void write_row(std::ostream& out, const std::vector<double>& cells);

}  // namespace gpkmd::csv
