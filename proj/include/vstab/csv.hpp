#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace vstab {

/// Column of a CSV table; the header cell reads "name [unit]" followed by "{relation}" when
/// the column realizes a formula. Commas are not allowed in any part.
struct Column {
  std::string name;
  std::string unit;
  std::string relation;
};

/// Writes a header row followed by numeric rows in round-trip precision.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<Column> columns);
  void row(const std::vector<double>& values);
  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

/// Parses a file written by CsvWriter: header cells and rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace vstab
