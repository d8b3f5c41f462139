#include "vstab/csv.hpp"

#include <charconv>
#include <sstream>

#include "vstab/errors.hpp"

namespace vstab {

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<Column> columns)
    : out_(path), width_(columns.size()) {
  if (!out_) throw ValidationError("cannot write " + path.string());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& c = columns[i];
    if ((c.name + c.unit + c.relation).find(',') != std::string::npos) {
      throw ValidationError("CSV column '" + c.name + "' contains a comma");
    }
    if (i) out_ << ',';
    out_ << c.name << " [" << c.unit << ']';
    if (!c.relation.empty()) out_ << " {" << c.relation << '}';
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw ValidationError("CsvWriter: row width does not match the header");
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    const auto res = std::to_chars(buf, buf + sizeof buf, values[i]);
    out_.write(buf, res.ptr - buf);
  }
  out_ << '\n';
  ++rows_;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty CSV file " + path.string());
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    for (std::string cell; std::getline(rs, cell, ',');) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{}) throw ValidationError("non-numeric CSV cell '" + cell + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace vstab
