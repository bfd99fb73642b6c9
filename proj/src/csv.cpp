#include "bear/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bear/errors.hpp"

namespace bear {

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quoted(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_cell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", *d);
    return buf;
  }
  return quoted(std::get<std::string>(cell));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

void write_metrics_csv(const std::vector<std::string>& columns,
                       const std::vector<MetricRow>& rows,
                       const std::filesystem::path& path) {
  if (columns.empty()) throw ParameterError("write_metrics_csv: no columns");
  std::ofstream out(path);
  if (!out) throw StorageError("cannot open " + path.string() + " for writing");
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out << ',';
    out << quoted(columns[c]);
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw ParameterError("write_metrics_csv: record has " +
                           std::to_string(row.size()) + " fields, schema has " +
                           std::to_string(columns.size()));
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_cell(row[c]);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw StorageError("write failed for " + path.string());
}

CsvContents read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open " + path.string());
  CsvContents contents;
  std::string line;
  if (!std::getline(in, line))
    throw FormatError(path.string() + ": empty CSV, expected a header row");
  contents.columns = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != contents.columns.size())
      throw FormatError(path.string() + ": row has " + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(contents.columns.size()));
    contents.rows.push_back(std::move(fields));
  }
  return contents;
}

}  // namespace bear
