#include "spinmech/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "spinmech/donors.hpp"
#include "spinmech/dynamics.hpp"
#include "spinmech/errors.hpp"
#include "spinmech/gates.hpp"
#include "spinmech/spectra.hpp"

namespace spinmech {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Status strings live in CSV cells, so they must stay single-field.
std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  if (s.size() > 160) s = s.substr(0, 157) + "...";
  return s;
}

struct PointResult {
  std::vector<double> values;
  std::string status = "ok";
};

void fill_failure(PointResult& r, std::size_t width, const std::string& msg) {
  r.values.assign(width, kNan);
  r.status = sanitize(msg);
}

void parallel_map(int workers, int n, const std::function<void(int)>& fn) {
  const int w = std::max(1, std::min(workers, n));
  if (w == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : threads) th.join();
}

using PointFn = std::function<PointResult(int)>;

// Runs every point through the pool; exceptions and overlong points become
// failure rows, never aborted sweeps.
std::vector<PointResult> run_points(const RunConfig& cfg, int n,
                                    std::size_t width, const PointFn& point) {
  std::vector<PointResult> out(static_cast<std::size_t>(n));
  parallel_map(cfg.workers, n, [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    PointResult r;
    try {
      r = point(i);
    } catch (const std::exception& e) {
      fill_failure(r, width, std::string("failed: ") + e.what());
    } catch (...) {
      fill_failure(r, width, "failed: unknown error");
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (cfg.point_timeout_s > 0.0 && dt > cfg.point_timeout_s)
      fill_failure(r, width,
                   "timeout: point exceeded " + fmt17(cfg.point_timeout_s) +
                       " s");
    if (r.values.size() != width)
      fill_failure(r, width, "failed: internal schema mismatch");
    out[static_cast<std::size_t>(i)] = std::move(r);
  });
  return out;
}

void assemble(ResultTable& table, std::vector<PointResult>&& points) {
  table.rows.reserve(points.size());
  table.status.reserve(points.size());
  for (auto& p : points) {
    table.rows.push_back(std::move(p.values));
    table.status.push_back(std::move(p.status));
  }
}

ResultTable run_eigen_map(const RunConfig& cfg) {
  ResultTable t;
  t.columns = expected_columns(ExperimentKind::eigen_map);
  t.units = {"Hz", "Hz", "Hz"};
  const int nw = static_cast<int>(cfg.omega_r_grid.size());
  const int nd = static_cast<int>(cfg.delta_nu_grid.size());
  auto pts = run_points(cfg, nw * nd, 3, [&](int i) {
    const double wr = cfg.omega_r_grid[static_cast<std::size_t>(i / nd)];
    const double dn = cfg.delta_nu_grid[static_cast<std::size_t>(i % nd)];
    SystemSpec spec = cfg.system;
    spec.Omega_R = wr;
    spec.gamma_e_B1 = 2.0 * wr;
    spec.delta_nu = dn;
    PointResult r;
    r.values = {wr, dn, eigen_shift(spec)};
    return r;
  });
  assemble(t, std::move(pts));
  return t;
}

ResultTable run_shift_sweep(const RunConfig& cfg) {
  ResultTable t;
  t.columns = expected_columns(ExperimentKind::shift_sweep);
  t.units = {"Hz", "Hz", "Hz", "Hz"};
  const int n = static_cast<int>(cfg.lambda_grid.size());
  auto pts = run_points(cfg, n, 4, [&](int i) {
    const double lam = cfg.lambda_grid[static_cast<std::size_t>(i)];
    SystemSpec spec = cfg.system;
    spec.lambda = lam;
    PointResult r;
    const double sim = simulated_shift(spec, cfg.branch);
    const double eig = eigen_shift(spec);
    const double ana = analytic_shift(lam, spec.Omega_R, spec.omega_m);
    r.values = {lam, sim, eig, ana};
    return r;
  });
  assemble(t, std::move(pts));
  return t;
}

ResultTable run_threshold_map(const RunConfig& cfg) {
  ResultTable t;
  t.columns = expected_columns(ExperimentKind::threshold_map);
  t.units = {"Hz", "Hz", "Hz"};
  const int nr = static_cast<int>(cfg.delta_r_grid.size());
  const int nn = static_cast<int>(cfg.delta_nu_grid.size());
  auto pts = run_points(cfg, nr * nn, 3, [&](int i) {
    const double dr = cfg.delta_r_grid[static_cast<std::size_t>(i / nn)];
    const double dn = cfg.delta_nu_grid[static_cast<std::size_t>(i % nn)];
    const auto res = threshold_sweep({dr}, {dn}, cfg.target_shift, cfg.system);
    PointResult r;
    r.values = {dr, dn, res[0].lambda_min};
    if (!res[0].ok) {
      r.values[2] = kNan;
      r.status = sanitize("failed: " + res[0].note);
    }
    return r;
  });
  assemble(t, std::move(pts));
  return t;
}

PointResult gate_point(const TwoQubitSpec& base, double gamma_pct, double lam,
                       double dr, bool with_gamma_column) {
  const auto res = fidelity_sweep(base, {lam}, {dr}, base.n_th, gamma_pct);
  const GateResult& g = res[0];
  PointResult r;
  if (with_gamma_column)
    r.values = {gamma_pct, lam, dr, g.fidelity, g.fidelity_uncompensated,
                g.optimal_time};
  else
    r.values = {lam,
                dr,
                g.fidelity,
                g.fidelity_uncompensated,
                g.optimal_time,
                g.boundary_warning ? 1.0 : 0.0};
  if (!g.ok) {
    for (std::size_t k = (with_gamma_column ? 3u : 2u); k < r.values.size();
         ++k)
      r.values[k] = kNan;
    r.status = sanitize("failed: " + g.note);
  }
  return r;
}

ResultTable run_gate_sweep(const RunConfig& cfg) {
  ResultTable t;
  t.columns = expected_columns(ExperimentKind::gate_sweep);
  t.units = {"Hz", "Hz", "-", "-", "s", "flag"};
  const int nl = static_cast<int>(cfg.lambda_grid.size());
  const int nr = static_cast<int>(cfg.delta_r_grid.size());
  auto pts = run_points(cfg, nl * nr, 6, [&](int i) {
    const double lam = cfg.lambda_grid[static_cast<std::size_t>(i / nr)];
    const double dr = cfg.delta_r_grid[static_cast<std::size_t>(i % nr)];
    return gate_point(cfg.pair, cfg.gate_gamma_pct, lam, dr, false);
  });
  assemble(t, std::move(pts));
  return t;
}

ResultTable run_gamma_sweep(const RunConfig& cfg) {
  ResultTable t;
  t.columns = expected_columns(ExperimentKind::gamma_sweep);
  t.units = {"%", "Hz", "Hz", "-", "-", "s"};
  const int ng = static_cast<int>(cfg.gamma_pct_grid.size());
  const int nl = static_cast<int>(cfg.lambda_grid.size());
  const int nr = static_cast<int>(cfg.delta_r_grid.size());
  auto pts = run_points(cfg, ng * nl * nr, 6, [&](int i) {
    const int gi = i / (nl * nr);
    const int li = (i / nr) % nl;
    const int ri = i % nr;
    return gate_point(cfg.pair,
                      cfg.gamma_pct_grid[static_cast<std::size_t>(gi)],
                      cfg.lambda_grid[static_cast<std::size_t>(li)],
                      cfg.delta_r_grid[static_cast<std::size_t>(ri)], true);
  });
  assemble(t, std::move(pts));
  return t;
}

ResultTable run_donor_coupling(const RunConfig& cfg) {
  ResultTable t;
  t.columns = expected_columns(ExperimentKind::donor_coupling);
  const bool gradient =
      cfg.donor.profile_kind == FieldProfile::Kind::gradient;
  t.units = {"m", gradient ? "T/m" : "-", "Hz", "Hz"};
  const DonorSpecies species = load_species(cfg.donor.species_file);
  const FieldProfile profile =
      load_profile(cfg.donor.profile_file, cfg.donor.profile_kind);
  const int n = static_cast<int>(cfg.distance_grid.size());
  auto pts = run_points(cfg, n, 4, [&](int i) {
    const double d = cfg.distance_grid[static_cast<std::size_t>(i)];
    const double v = interp(profile, d);
    const double single =
        gradient ? gradient_coupling(species, cfg.donor.mode, v,
                                     cfg.donor.b_bias, cfg.donor.pair)
                 : strain_coupling(species, v);
    const double collective =
        ensemble_coupling(std::abs(single), cfg.donor.ensemble_n);
    PointResult r;
    r.values = {d, v, single, collective};
    return r;
  });
  assemble(t, std::move(pts));
  return t;
}

ResultTable run_spectrum(const RunConfig& cfg) {
  ResultTable t;
  t.columns = expected_columns(ExperimentKind::spectrum);
  t.units = {"Hz", "1/Hz"};
  try {
    const SystemSpec& spec = cfg.system;
    const double center =
        cfg.spectrum_center < 0.0 ? spec.omega_m : cfg.spectrum_center;
    double halfspan = cfg.spectrum_halfspan;
    if (halfspan <= 0.0) {
      const double linewidth = spec.rates.kappa_down - spec.rates.kappa_up;
      if (linewidth <= 0.0)
        throw PreconditionError(
            "spectrum.halfspan must be given when the mode has no net "
            "damping");
      halfspan = 20.0 * linewidth;
    }
    std::vector<double> grid(static_cast<std::size_t>(cfg.spectrum_points));
    for (int i = 0; i < cfg.spectrum_points; ++i)
      grid[static_cast<std::size_t>(i)] =
          center - halfspan +
          2.0 * halfspan * i / (cfg.spectrum_points - 1);

    const LindbladModel model = dressed_model(spec);
    const HilbertSpace space = spec.space();
    Matrix qubit = Matrix::Zero(2, 2);
    qubit(cfg.branch == QubitBranch::up ? 0 : 1,
          cfg.branch == QubitBranch::up ? 0 : 1) = 1.0;
    const State th = thermal_state(spec.n_fock, spec.n_th);
    State rho0{space, Eigen::kroneckerProduct(qubit, th.rho).eval()};
    const Operator a = lift(space, 1, fock_destroy(spec.n_fock));
    const Operator x = a + a.adjoint();

    const Spectrum s = spectral_density(model, rho0, x, grid);
    for (std::size_t i = 0; i < s.omega_grid.size(); ++i) {
      t.rows.push_back({s.omega_grid[i], s.values[i]});
      t.status.push_back("ok");
    }
  } catch (const std::exception& e) {
    t.rows.push_back({kNan, kNan});
    t.status.push_back(sanitize(std::string("failed: ") + e.what()));
  }
  return t;
}

}  // namespace

bool ResultTable::any_failure() const {
  for (const auto& s : status)
    if (s != "ok") return true;
  return false;
}

std::vector<std::string> expected_columns(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::eigen_map:
      return {"Omega_R", "delta_nu", "shift_Hz"};
    case ExperimentKind::shift_sweep:
      return {"lambda", "shift_sim", "shift_eigen", "shift_analytic"};
    case ExperimentKind::threshold_map:
      return {"delta_r", "delta_nu", "lambda_min"};
    case ExperimentKind::gate_sweep:
      return {"lambda", "delta_r", "fidelity", "fidelity_raw", "t_opt",
              "boundary"};
    case ExperimentKind::gamma_sweep:
      return {"gamma_pct", "lambda", "delta_r", "fidelity", "fidelity_raw",
              "t_opt"};
    case ExperimentKind::donor_coupling:
      return {"distance", "profile_value", "lambda_single",
              "lambda_ensemble"};
    case ExperimentKind::spectrum:
      return {"omega", "S_bar"};
  }
  throw InvalidParameterError("unknown experiment kind");
}

ResultTable run(const RunConfig& cfg) {
  cfg.validate();
  ResultTable t;
  switch (cfg.kind) {
    case ExperimentKind::eigen_map: t = run_eigen_map(cfg); break;
    case ExperimentKind::shift_sweep: t = run_shift_sweep(cfg); break;
    case ExperimentKind::threshold_map: t = run_threshold_map(cfg); break;
    case ExperimentKind::gate_sweep: t = run_gate_sweep(cfg); break;
    case ExperimentKind::gamma_sweep: t = run_gamma_sweep(cfg); break;
    case ExperimentKind::donor_coupling: t = run_donor_coupling(cfg); break;
    case ExperimentKind::spectrum: t = run_spectrum(cfg); break;
  }
  t.kind = cfg.kind;
  t.version = kToolkitVersion;
  t.config_text = canonical_text(cfg);
  t.fingerprint = fingerprint(cfg);
  return t;
}

void export_csv(const ResultTable& table, const std::string& path) {
  if (table.rows.empty())
    throw PreconditionError("refusing to export an empty result table");
  if (table.columns.size() != table.units.size())
    throw PreconditionError("column and unit schemas differ in length");
  if (table.columns != expected_columns(table.kind))
    throw PreconditionError("column schema does not match the experiment kind");
  for (const auto& row : table.rows)
    if (row.size() != table.columns.size())
      throw PreconditionError("row width does not match the schema");
  if (table.status.size() != table.rows.size())
    throw PreconditionError("status column length does not match rows");

  std::ostringstream out;
  out << "# spinmech-result v1\n";
  out << "# version: " << table.version << "\n";
  out << "# kind: " << kind_name(table.kind) << "\n";
  char fp[32];
  std::snprintf(fp, sizeof(fp), "0x%016llx",
                static_cast<unsigned long long>(table.fingerprint));
  out << "# fingerprint: " << fp << "\n";
  out << "# config-begin\n";
  std::istringstream cfg(table.config_text);
  std::string line;
  while (std::getline(cfg, line)) out << "# " << line << "\n";
  out << "# config-end\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << table.columns[c] << ",";
  out << "status\n";
  for (std::size_t c = 0; c < table.units.size(); ++c)
    out << table.units[c] << ",";
  out << "-\n";
  for (std::size_t rix = 0; rix < table.rows.size(); ++rix) {
    for (double v : table.rows[rix]) out << fmt17(v) << ",";
    out << sanitize(table.status[rix]) << "\n";
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open for writing: " + path);
  file << out.str();
  if (!file) throw Error("write failed: " + path);
}

ResultTable parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open result file: " + path);
  ResultTable t;
  std::string line;
  int line_no = 0;
  bool have_format = false, in_config = false, have_columns = false,
       have_units = false;

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = s.find(',', start);
      if (comma == std::string::npos) {
        cells.push_back(s.substr(start));
        return cells;
      }
      cells.push_back(s.substr(start, comma - start));
      start = comma + 1;
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.size() > 1 ? line.substr(2) : "";
      if (line.rfind("# spinmech-result", 0) == 0) {
        have_format = true;
      } else if (line.rfind("# version: ", 0) == 0) {
        t.version = line.substr(11);
      } else if (line.rfind("# kind: ", 0) == 0) {
        t.kind = kind_from_name(line.substr(8));
      } else if (line.rfind("# fingerprint: ", 0) == 0) {
        t.fingerprint = std::strtoull(line.substr(15).c_str(), nullptr, 16);
      } else if (line == "# config-begin") {
        in_config = true;
      } else if (line == "# config-end") {
        in_config = false;
      } else if (in_config) {
        t.config_text += body + "\n";
      }
      continue;
    }
    if (!have_format)
      throw ParseError("missing result header before line " +
                       std::to_string(line_no) + " of " + path);
    auto cells = split(line);
    if (cells.size() < 2)
      throw ParseError("too few columns at line " + std::to_string(line_no) +
                       " of " + path);
    if (!have_columns) {
      if (cells.back() != "status")
        throw ParseError("last column must be 'status' in " + path);
      cells.pop_back();
      t.columns = cells;
      have_columns = true;
      continue;
    }
    if (!have_units) {
      cells.pop_back();
      t.units = cells;
      if (t.units.size() != t.columns.size())
        throw ParseError("units row width mismatch in " + path);
      have_units = true;
      continue;
    }
    if (cells.size() != t.columns.size() + 1)
      throw ParseError("row width mismatch at line " + std::to_string(line_no) +
                       " of " + path);
    std::vector<double> row;
    row.reserve(t.columns.size());
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const char* begin = cells[c].c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin)
        throw ParseError("non-numeric cell at line " + std::to_string(line_no) +
                         " of " + path);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
    t.status.push_back(cells.back());
  }
  if (!have_columns || t.rows.empty())
    throw ParseError("no data rows in " + path);
  return t;
}

std::string csv_path(const RunConfig& config) {
  return (std::filesystem::path(config.out_dir) /
          (kind_name(config.kind) + ".csv"))
      .string();
}

}  // namespace spinmech
