#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace finsler::cli {

/// CSV result table with a '#'-prefixed metadata header. Floats are
/// serialized with 17 significant digits at insertion time, so a written
/// file replays byte-identically for identical inputs.
class ResultTable {
 public:
  explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_header(std::string line) { header_.push_back(std::move(line)); }
  void add_row(std::vector<std::string> cells);

  static std::string num(double value);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& os) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace finsler::cli
