#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace bear {

// One CSV value. Doubles are printed with 9 significant digits.
using Cell = std::variant<std::int64_t, double, std::string>;

using MetricRow = std::vector<Cell>;

// Writes an RFC-4180-style CSV: a header row of column names, then one line
// per record. Every record must match the column count (shared schema).
void write_metrics_csv(const std::vector<std::string>& columns,
                       const std::vector<MetricRow>& rows,
                       const std::filesystem::path& path);

// Minimal reader for round-trip checks and downstream consumption of our own
// output. Handles quoted fields; no embedded newlines.
struct CsvContents {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};
CsvContents read_csv(const std::filesystem::path& path);

}  // namespace bear
