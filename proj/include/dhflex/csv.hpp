#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace dhflex::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  int column(const std::string& name) const;  // -1 if absent
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

// Numeric CSV with a header line. Throws IngestError with the 1-based file
// line of the first malformed row.
Table read(const std::string& path);

class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace dhflex::csv
