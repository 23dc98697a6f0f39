#pragma once

#include <string>

#include "spinmech/sweep.hpp"

namespace spinmech {

// Renders the table as a vector graphic: heatmap for the 2-D maps
// (eigen-map, threshold-map, gate-sweep), line chart otherwise. Axes carry
// unit-suffixed column labels. Writes <dir>/<kind>.svg and returns the
// path; the output contains no timestamps, so reruns are byte-identical.
std::string write_plot(const ResultTable& table, const std::string& dir);

}  // namespace spinmech
