#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spinmech/config.hpp"
#include "spinmech/errors.hpp"
#include "spinmech/plot.hpp"
#include "spinmech/sweep.hpp"

namespace {

// Exit codes: 0 success, 1 configuration invalid, 2 runtime failure,
// 3 run completed but some sweep points failed.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kPartialFailure = 3;

struct CliOptions {
  std::string config_path;
  std::string out_override;
  int workers_override = 0;
  bool plot = false;
};

const char* kind_help(spinmech::ExperimentKind k) {
  using spinmech::ExperimentKind;
  switch (k) {
    case ExperimentKind::eigen_map:
      return "Mechanical frequency pull over an (Omega_R, delta_nu) grid";
    case ExperimentKind::shift_sweep:
      return "Simulated vs closed-form frequency pull over a coupling grid";
    case ExperimentKind::threshold_map:
      return "Minimum coupling reaching a target pull per detuning point";
    case ExperimentKind::gate_sweep:
      return "Two-qubit gate fidelity over a (lambda, delta_r) grid";
    case ExperimentKind::gamma_sweep:
      return "Gate fidelity versus decay-rate scaling";
    case ExperimentKind::donor_coupling:
      return "Donor coupling rates along a distance profile";
    case ExperimentKind::spectrum:
      return "Symmetrized displacement noise spectrum";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  using spinmech::ExperimentKind;

  CLI::App app{"spinmech: spin-mechanics simulation sweep toolkit"};
  app.set_version_flag("--version",
                       std::string("spinmech ") + spinmech::kToolkitVersion);
  app.require_subcommand(1);

  const std::vector<ExperimentKind> kinds = {
      ExperimentKind::eigen_map,    ExperimentKind::shift_sweep,
      ExperimentKind::threshold_map, ExperimentKind::gate_sweep,
      ExperimentKind::gamma_sweep,  ExperimentKind::donor_coupling,
      ExperimentKind::spectrum};

  CliOptions opts;
  ExperimentKind selected = ExperimentKind::eigen_map;
  for (ExperimentKind k : kinds) {
    CLI::App* sub = app.add_subcommand(spinmech::kind_name(k), kind_help(k));
    sub->add_option("--config", opts.config_path, "experiment config file")
        ->required();
    sub->add_option("--out", opts.out_override, "output directory override");
    sub->add_option("--workers", opts.workers_override,
                    "worker thread count override");
    sub->add_flag("--plot", opts.plot, "also write an SVG chart");
    sub->callback([&opts, &selected, k] { selected = k; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  spinmech::RunConfig cfg;
  try {
    const spinmech::ConfigMap map = spinmech::parse_config(opts.config_path);
    cfg = spinmech::run_config_from_map(map);
    if (map.has("run.kind") && cfg.kind != selected) {
      std::fprintf(stderr,
                   "error: config file declares kind '%s' but the '%s' "
                   "subcommand was invoked\n",
                   spinmech::kind_name(cfg.kind).c_str(),
                   spinmech::kind_name(selected).c_str());
      return kConfigError;
    }
    cfg.kind = selected;
    if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
    if (opts.workers_override > 0) cfg.workers = opts.workers_override;
    if (opts.plot) cfg.plot = true;
    cfg.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }

  spinmech::ResultTable table;
  std::string csv;
  try {
    table = spinmech::run(cfg);
    csv = spinmech::csv_path(cfg);
    spinmech::export_csv(table, csv);
    std::printf("wrote %s (%zu rows)\n", csv.c_str(), table.rows.size());
    if (cfg.plot) {
      const std::string svg = spinmech::write_plot(table, cfg.out_dir);
      std::printf("wrote %s\n", svg.c_str());
    }
  } catch (const spinmech::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }

  if (table.any_failure()) {
    std::size_t failed = 0;
    for (const auto& s : table.status)
      if (s != "ok") ++failed;
    std::fprintf(stderr, "warning: %zu of %zu points did not complete\n",
                 failed, table.status.size());
    return kPartialFailure;
  }
  return kOk;
}
