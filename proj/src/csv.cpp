#include "dhflex/csv.hpp"

#include <charconv>
#include <sstream>

#include "dhflex/errors.hpp"

namespace dhflex::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  return out;
}

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path, 0);
  Table t;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    t.header = split(line);
    break;
  }
  if (t.header.empty()) throw IngestError(path + ": missing header", lineno);
  t.columns.assign(t.header.size(), {});
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto fields = split(line);
    if (fields.size() != t.header.size()) {
      throw IngestError(path + ": expected " + std::to_string(t.header.size()) + " fields on line " +
                            std::to_string(lineno),
                        lineno);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v = 0.0;
      const char* b = fields[i].data();
      const char* e = b + fields[i].size();
      const auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc() || r.ptr != e) {
        throw IngestError(path + ": bad number '" + fields[i] + "' on line " + std::to_string(lineno),
                          lineno);
      }
      t.columns[i].push_back(v);
    }
  }
  return t;
}

Writer::Writer(const std::string& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
  if (!out_) throw ConfigError("cannot write " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
  out_.precision(10);
}

void Writer::row(const std::vector<double>& values) {
  if (values.size() != width_) throw ContractViolation("csv row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
  out_ << '\n';
}

}  // namespace dhflex::csv
