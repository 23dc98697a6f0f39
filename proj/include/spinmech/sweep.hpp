#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinmech/config.hpp"

namespace spinmech {

// Flat numeric result set of one experiment run. Every row carries a status
// string ("ok", "failed: ...", or "timeout ..."); numeric cells of failed
// rows are NaN. The canonical config text and its fingerprint are embedded
// so any table can be regenerated from the file alone.
struct ResultTable {
  ExperimentKind kind = ExperimentKind::eigen_map;
  std::vector<std::string> columns;  // numeric columns; status is implicit
  std::vector<std::string> units;    // one per column
  std::vector<std::vector<double>> rows;
  std::vector<std::string> status;  // one per row
  std::uint64_t fingerprint = 0;
  std::string version;
  std::string config_text;

  bool any_failure() const;
};

// Numeric column schema of an experiment kind (status excluded).
std::vector<std::string> expected_columns(ExperimentKind kind);

// Executes the experiment described by the config: validates, fans the
// sweep points over a worker pool, and assembles rows in grid order.
// Worker count changes wall time only, never the table contents. A point
// whose wall time exceeds point_timeout_s (when positive) is marked
// "timeout" and its values are dropped.
ResultTable run(const RunConfig& config);

// CSV layout: '#' header block (format tag, version, kind, fingerprint,
// canonical config echo), then the column-name row, a units row, and data
// rows with 17-significant-digit numbers. No timestamps, so identical
// configs produce byte-identical files.
void export_csv(const ResultTable& table, const std::string& path);

// Inverse of export_csv; numbers round-trip exactly.
ResultTable parse_csv(const std::string& path);

// Destination file for a run: <out_dir>/<kind>.csv
std::string csv_path(const RunConfig& config);

}  // namespace spinmech
