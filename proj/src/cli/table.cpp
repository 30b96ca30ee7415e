#include "finsler/cli/table.hpp"

#include <cstdio>
#include <stdexcept>

namespace finsler::cli {

std::string ResultTable::num(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void ResultTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw std::logic_error("ResultTable: row width does not match the column set");
  rows_.push_back(std::move(cells));
}

void ResultTable::write(std::ostream& os) const {
  for (const auto& line : header_) os << "# " << line << "\n";
  for (size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << "\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

}  // namespace finsler::cli
