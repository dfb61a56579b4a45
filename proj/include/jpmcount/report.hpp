#pragma once

// Deterministic text output: number formatting, CSV and aligned tables.

#include <ostream>
#include <string>
#include <vector>

namespace jpm::cli {

/// 9 significant digits; scientific when |x| >= 1e6 or 0 < |x| < 1e-6,
/// fixed otherwise with trailing zeros removed.
std::string format_number(double x);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

/// Plain-text table with left-aligned, space-padded columns.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

}  // namespace jpm::cli
