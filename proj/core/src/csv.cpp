#include "gpkmd/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>

#include "gpkmd/error.hpp"

namespace gpkmd::csv {
namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_double(std::string_view cell, double& value) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

NumericTable parse_numeric(std::string_view text) {
  NumericTable table;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_content_row = true;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    const auto cells = split(line);
    std::vector<double> values(cells.size());
    std::size_t numeric = 0;
    std::size_t bad_column = cells.size();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (parse_double(cells[c], values[c])) {
        ++numeric;
      } else if (bad_column == cells.size()) {
        bad_column = c;
      }
    }

    if (first_content_row) {
      first_content_row = false;
      width = cells.size();
      if (numeric == 0) {
        for (auto cell : cells) table.header.emplace_back(cell);
        continue;
      }
    }

    if (cells.size() != width) {
      throw ParseError("row " + std::to_string(line_no) + " has " +
                           std::to_string(cells.size()) + " columns, expected " +
                           std::to_string(width),
                       line_no);
    }
    if (bad_column != cells.size()) {
      throw ParseError("row " + std::to_string(line_no) + ", column " +
                           std::to_string(bad_column + 1) + ": non-numeric cell '" +
                           std::string(cells[bad_column]) + "'",
                       line_no);
    }
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (!std::isfinite(values[c])) {
        throw ParseError("row " + std::to_string(line_no) + ", column " +
                             std::to_string(c + 1) + ": non-finite value",
                         line_no);
      }
    }
    table.rows.push_back(std::move(values));
    if (eol == text.size()) break;
  }
  return table;
}

std::string format(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

void write_row(std::ostream& out, const std::vector<double>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << format(cells[i]);
  }
  out << '\n';
}

}  // namespace gpkmd::csv
