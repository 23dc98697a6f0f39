#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spinmech/donors.hpp"
#include "spinmech/models.hpp"
#include "spinmech/spectra.hpp"

namespace spinmech {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Key-value configuration text with INI-style [section] headers; entries are
// flattened to "section.key". '#' starts a comment.
struct ConfigMap {
  std::map<std::string, std::string> entries;
  std::string origin;

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // ParseError if absent
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
};

ConfigMap parse_config_text(const std::string& text, const std::string& origin);
ConfigMap parse_config(const std::string& path);

enum class ExperimentKind {
  eigen_map,
  shift_sweep,
  threshold_map,
  gate_sweep,
  gamma_sweep,
  donor_coupling,
  spectrum
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

// Grid value lists: either explicit whitespace/comma separated numbers, or
// "lin lo hi n" / "log lo hi n" shorthands.
std::vector<double> parse_grid(const std::string& text);

// Inputs of the donor-coupling pipeline.
struct DonorTask {
  std::string species_file;
  std::string profile_file;
  FieldProfile::Kind profile_kind = FieldProfile::Kind::gradient;
  double b_bias = 0.0;
  LevelPair pair;
  MechanicalMode mode;
  int ensemble_n = 1;
};

// Fully materialized experiment description. Defaults are filled in at load
// time so the fingerprint covers every knob that shapes the output.
struct RunConfig {
  ExperimentKind kind = ExperimentKind::eigen_map;
  std::string out_dir = "runs";
  int workers = 1;
  std::uint64_t seed = 0;
  double point_timeout_s = 600.0;
  bool plot = false;

  SystemSpec system;        // single-qubit experiments
  TwoQubitSpec pair;        // gate experiments
  DonorTask donor;          // donor-coupling
  QubitBranch branch = QubitBranch::up;

  std::vector<double> omega_r_grid;
  std::vector<double> delta_nu_grid;
  std::vector<double> lambda_grid;
  std::vector<double> delta_r_grid;
  std::vector<double> gamma_pct_grid;
  std::vector<double> distance_grid;
  double target_shift = 0.0;    // threshold-map
  double gate_gamma_pct = 100;  // gate-sweep rate scaling
  double spectrum_center = -1.0;    // <0: use omega_m
  double spectrum_halfspan = -1.0;  // <0: auto from the fitted linewidth
  int spectrum_points = 401;

  // Collects every violation (grids, payload, worker count, output
  // writability) and raises one ValidationError naming all of them.
  void validate() const;
};

RunConfig run_config_from_map(const ConfigMap& map);
RunConfig load_run_config(const std::string& path);

// Deterministic key=value rendering of everything that influences the
// numbers; excludes execution-only knobs (out_dir, workers, plot).
std::string canonical_text(const RunConfig& config);

std::uint64_t fnv1a(std::string_view text);
std::uint64_t fingerprint(const RunConfig& config);

}  // namespace spinmech
