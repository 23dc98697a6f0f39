#include "spinmech/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "spinmech/errors.hpp"

namespace spinmech {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_grid(const std::vector<double>& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ' ';
    out += fmt(g[i]);
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError("value of " + what + " is not a number: '" + text + "'");
  return x;
}

// Every key the configuration format understands; anything else is a typo.
const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "run.kind", "run.out", "run.workers", "run.seed", "run.point_timeout_s",
      "system.omega_m", "system.omega_r", "system.delta_nu", "system.lambda",
      "system.gamma_e_b0", "system.gamma_e_b1", "system.n_fock",
      "system.n_th", "system.kappa_down", "system.kappa_up",
      "system.gamma_down", "system.gamma_up", "system.gamma_phi",
      "system.branch",
      "pair.omega_m", "pair.n_fock", "pair.n_th", "pair.kappa_down",
      "pair.kappa_up",
      "qubit1.omega_r", "qubit1.delta_nu", "qubit1.lambda",
      "qubit1.gamma_down", "qubit1.gamma_up", "qubit1.gamma_phi",
      "qubit2.omega_r", "qubit2.delta_nu", "qubit2.lambda",
      "qubit2.gamma_down", "qubit2.gamma_up", "qubit2.gamma_phi",
      "sweep.omega_r", "sweep.delta_nu", "sweep.lambda", "sweep.delta_r",
      "sweep.gamma_pct", "sweep.distance", "sweep.target_shift",
      "sweep.gate_gamma_pct",
      "spectrum.center", "spectrum.halfspan", "spectrum.points",
      "donor.species_file", "donor.profile_file", "donor.profile_kind",
      "donor.b_bias", "donor.pair_lower", "donor.pair_upper", "donor.x_zpf",
      "donor.mode_omega_m", "donor.m_eff", "donor.ensemble_n",
  };
  return keys;
}

}  // namespace

bool ConfigMap::has(const std::string& key) const {
  return entries.count(key) != 0;
}

const std::string& ConfigMap::get(const std::string& key) const {
  const auto it = entries.find(key);
  if (it == entries.end())
    throw ParseError("missing key '" + key + "' in " + origin);
  return it->second;
}

std::string ConfigMap::text(const std::string& key,
                            const std::string& fallback) const {
  const auto it = entries.find(key);
  return it == entries.end() ? fallback : it->second;
}

double ConfigMap::number(const std::string& key) const {
  return parse_number(get(key), "'" + key + "' in " + origin);
}

double ConfigMap::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int ConfigMap::integer(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double x = number(key);
  const int n = static_cast<int>(std::lround(x));
  if (std::abs(x - n) > 1e-9)
    throw ParseError("value of '" + key + "' in " + origin +
                     " must be an integer");
  return n;
}

ConfigMap parse_config_text(const std::string& text,
                            const std::string& origin) {
  ConfigMap map;
  map.origin = origin;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ParseError("malformed section header at line " +
                         std::to_string(line_no) + " of " + origin);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value at line " + std::to_string(line_no) +
                       " of " + origin);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("empty key or value at line " + std::to_string(line_no) +
                       " of " + origin);
    const std::string full = section.empty() ? key : section + "." + key;
    if (!known_keys().count(full))
      throw ParseError("unknown key '" + full + "' at line " +
                       std::to_string(line_no) + " of " + origin);
    if (map.entries.count(full))
      throw ParseError("duplicate key '" + full + "' at line " +
                       std::to_string(line_no) + " of " + origin);
    map.entries[full] = value;
  }
  return map;
}

ConfigMap parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::eigen_map: return "eigen-map";
    case ExperimentKind::shift_sweep: return "shift-sweep";
    case ExperimentKind::threshold_map: return "threshold-map";
    case ExperimentKind::gate_sweep: return "gate-sweep";
    case ExperimentKind::gamma_sweep: return "gamma-sweep";
    case ExperimentKind::donor_coupling: return "donor-coupling";
    case ExperimentKind::spectrum: return "spectrum";
  }
  throw InvalidParameterError("unknown experiment kind");
}

ExperimentKind kind_from_name(const std::string& name) {
  for (ExperimentKind k :
       {ExperimentKind::eigen_map, ExperimentKind::shift_sweep,
        ExperimentKind::threshold_map, ExperimentKind::gate_sweep,
        ExperimentKind::gamma_sweep, ExperimentKind::donor_coupling,
        ExperimentKind::spectrum}) {
    if (kind_name(k) == name) return k;
  }
  throw ParseError("unknown experiment kind '" + name + "'");
}

std::vector<double> parse_grid(const std::string& text) {
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  if (tokens.empty()) throw ParseError("empty grid specification");

  if (tokens[0] == "lin" || tokens[0] == "log") {
    if (tokens.size() != 4)
      throw ParseError("grid shorthand needs '" + tokens[0] + " lo hi n'");
    const double lo = parse_number(tokens[1], "grid lo");
    const double hi = parse_number(tokens[2], "grid hi");
    const double nd = parse_number(tokens[3], "grid count");
    const int n = static_cast<int>(std::lround(nd));
    if (n < 1 || std::abs(nd - n) > 1e-9)
      throw ParseError("grid count must be a positive integer");
    std::vector<double> grid(static_cast<std::size_t>(n));
    if (tokens[0] == "lin") {
      for (int i = 0; i < n; ++i)
        grid[i] = (n == 1) ? lo : lo + i * (hi - lo) / (n - 1);
    } else {
      if (lo <= 0.0 || hi <= 0.0)
        throw ParseError("log grid endpoints must be positive");
      const double llo = std::log(lo), lhi = std::log(hi);
      for (int i = 0; i < n; ++i)
        grid[i] = (n == 1) ? lo
                           : std::exp(llo + i * (lhi - llo) / (n - 1));
    }
    return grid;
  }

  std::vector<double> grid;
  grid.reserve(tokens.size());
  for (const auto& t : tokens) grid.push_back(parse_number(t, "grid value"));
  return grid;
}

namespace {

SystemSpec system_from(const ConfigMap& m) {
  SystemSpec s;
  s.omega_m = m.number("system.omega_m", s.omega_m);
  s.Omega_R = m.number("system.omega_r", s.Omega_R);
  s.delta_nu = m.number("system.delta_nu", s.delta_nu);
  s.lambda = m.number("system.lambda", s.lambda);
  s.gamma_e_B0 = m.number("system.gamma_e_b0", s.gamma_e_B0);
  s.gamma_e_B1 = m.number("system.gamma_e_b1", 2.0 * s.Omega_R);
  s.n_fock = m.integer("system.n_fock", s.n_fock);
  s.n_th = m.number("system.n_th", s.n_th);
  s.rates.kappa_down = m.number("system.kappa_down", 0.0);
  s.rates.kappa_up = m.number("system.kappa_up", 0.0);
  s.rates.gamma_down = m.number("system.gamma_down", 0.0);
  s.rates.gamma_up = m.number("system.gamma_up", 0.0);
  s.rates.gamma_phi = m.number("system.gamma_phi", 0.0);
  return s;
}

QubitParams qubit_from(const ConfigMap& m, const std::string& section) {
  QubitParams q;
  q.Omega_R = m.number(section + ".omega_r", q.Omega_R);
  q.delta_nu = m.number(section + ".delta_nu", q.delta_nu);
  q.lambda = m.number(section + ".lambda", q.lambda);
  q.gamma_down = m.number(section + ".gamma_down", q.gamma_down);
  q.gamma_up = m.number(section + ".gamma_up", q.gamma_up);
  q.gamma_phi = m.number(section + ".gamma_phi", q.gamma_phi);
  return q;
}

QubitBranch branch_from(const ConfigMap& m) {
  const std::string b = m.text("system.branch", "up");
  if (b == "up") return QubitBranch::up;
  if (b == "down") return QubitBranch::down;
  throw ParseError("system.branch must be 'up' or 'down', got '" + b + "'");
}

}  // namespace

RunConfig run_config_from_map(const ConfigMap& m) {
  RunConfig c;
  if (m.has("run.kind")) c.kind = kind_from_name(m.get("run.kind"));
  c.out_dir = m.text("run.out", c.out_dir);
  c.workers = m.integer("run.workers", c.workers);
  const double seed = m.number("run.seed", 0.0);
  c.seed = static_cast<std::uint64_t>(seed);
  c.point_timeout_s = m.number("run.point_timeout_s", c.point_timeout_s);

  c.system = system_from(m);
  c.branch = branch_from(m);
  c.pair.omega_m = m.number("pair.omega_m", c.pair.omega_m);
  c.pair.n_fock = m.integer("pair.n_fock", c.pair.n_fock);
  c.pair.n_th = m.number("pair.n_th", c.pair.n_th);
  c.pair.kappa_down = m.number("pair.kappa_down", 0.0);
  c.pair.kappa_up = m.number("pair.kappa_up", 0.0);
  c.pair.qubit[0] = qubit_from(m, "qubit1");
  c.pair.qubit[1] = qubit_from(m, "qubit2");

  if (m.has("sweep.omega_r")) c.omega_r_grid = parse_grid(m.get("sweep.omega_r"));
  if (m.has("sweep.delta_nu"))
    c.delta_nu_grid = parse_grid(m.get("sweep.delta_nu"));
  if (m.has("sweep.lambda")) c.lambda_grid = parse_grid(m.get("sweep.lambda"));
  if (m.has("sweep.delta_r"))
    c.delta_r_grid = parse_grid(m.get("sweep.delta_r"));
  if (m.has("sweep.gamma_pct"))
    c.gamma_pct_grid = parse_grid(m.get("sweep.gamma_pct"));
  if (m.has("sweep.distance"))
    c.distance_grid = parse_grid(m.get("sweep.distance"));
  c.target_shift = m.number("sweep.target_shift", c.target_shift);
  c.gate_gamma_pct = m.number("sweep.gate_gamma_pct", c.gate_gamma_pct);

  c.spectrum_center = m.number("spectrum.center", c.spectrum_center);
  c.spectrum_halfspan = m.number("spectrum.halfspan", c.spectrum_halfspan);
  c.spectrum_points = m.integer("spectrum.points", c.spectrum_points);

  c.donor.species_file = m.text("donor.species_file", "");
  c.donor.profile_file = m.text("donor.profile_file", "");
  const std::string pk = m.text("donor.profile_kind", "gradient");
  if (pk == "gradient")
    c.donor.profile_kind = FieldProfile::Kind::gradient;
  else if (pk == "strain")
    c.donor.profile_kind = FieldProfile::Kind::strain;
  else
    throw ParseError("donor.profile_kind must be 'gradient' or 'strain'");
  c.donor.b_bias = m.number("donor.b_bias", 0.0);
  c.donor.pair.lower = m.integer("donor.pair_lower", 0);
  c.donor.pair.upper = m.integer("donor.pair_upper", 1);
  c.donor.mode.x_zpf = m.number("donor.x_zpf", 0.0);
  c.donor.mode.omega_m = m.number("donor.mode_omega_m", 0.0);
  c.donor.mode.m_eff = m.number("donor.m_eff", -1.0);
  c.donor.ensemble_n = m.integer("donor.ensemble_n", 1);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return run_config_from_map(parse_config(path));
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  auto check_payload = [&](const auto& payload, const std::string& label) {
    try {
      payload.validate();
    } catch (const std::exception& e) {
      problems.push_back(label + ": " + e.what());
    }
  };
  auto need_grid = [&](const std::vector<double>& g, const std::string& name) {
    if (g.empty()) {
      problems.push_back("grid '" + name + "' is required and non-empty");
      return;
    }
    for (double v : g)
      if (!std::isfinite(v)) {
        problems.push_back("grid '" + name + "' contains a non-finite value");
        break;
      }
  };

  switch (kind) {
    case ExperimentKind::eigen_map:
      check_payload(system, "system");
      need_grid(omega_r_grid, "omega_r");
      need_grid(delta_nu_grid, "delta_nu");
      for (double w : omega_r_grid)
        if (w < 0.0) {
          problems.push_back("omega_r grid values must be >= 0");
          break;
        }
      break;
    case ExperimentKind::shift_sweep:
      check_payload(system, "system");
      need_grid(lambda_grid, "lambda");
      for (double l : lambda_grid)
        if (l < 0.0) {
          problems.push_back("lambda grid values must be >= 0");
          break;
        }
      break;
    case ExperimentKind::threshold_map:
      check_payload(system, "system");
      need_grid(delta_r_grid, "delta_r");
      need_grid(delta_nu_grid, "delta_nu");
      if (!(target_shift > 0.0) || !std::isfinite(target_shift))
        problems.push_back("sweep.target_shift must be positive");
      break;
    case ExperimentKind::gate_sweep:
      check_payload(pair, "pair");
      need_grid(lambda_grid, "lambda");
      need_grid(delta_r_grid, "delta_r");
      if (!(gate_gamma_pct >= 0.0) || !std::isfinite(gate_gamma_pct))
        problems.push_back("sweep.gate_gamma_pct must be >= 0");
      break;
    case ExperimentKind::gamma_sweep:
      check_payload(pair, "pair");
      need_grid(lambda_grid, "lambda");
      need_grid(delta_r_grid, "delta_r");
      need_grid(gamma_pct_grid, "gamma_pct");
      for (double g : gamma_pct_grid)
        if (g < 0.0) {
          problems.push_back("gamma_pct grid values must be >= 0");
          break;
        }
      break;
    case ExperimentKind::donor_coupling: {
      need_grid(distance_grid, "distance");
      if (donor.species_file.empty()) {
        problems.push_back("donor.species_file is required");
      } else {
        try {
          load_species(donor.species_file);
        } catch (const std::exception& e) {
          problems.push_back(std::string("species file: ") + e.what());
        }
      }
      if (donor.profile_file.empty()) {
        problems.push_back("donor.profile_file is required");
      } else {
        try {
          const FieldProfile profile =
              load_profile(donor.profile_file, donor.profile_kind);
          for (double d : distance_grid)
            if (d < profile.distance.front() || d > profile.distance.back()) {
              problems.push_back(
                  "distance grid leaves the tabulated profile range");
              break;
            }
        } catch (const std::exception& e) {
          problems.push_back(std::string("profile file: ") + e.what());
        }
      }
      if (donor.profile_kind == FieldProfile::Kind::gradient) {
        check_payload(donor.mode, "donor mode");
        if (!(donor.b_bias > 0.0))
          problems.push_back("donor.b_bias must be positive");
        if (donor.pair.lower < 0 || donor.pair.upper <= donor.pair.lower)
          problems.push_back("donor level pair must satisfy lower < upper");
      }
      if (donor.ensemble_n < 1)
        problems.push_back("donor.ensemble_n must be >= 1");
      break;
    }
    case ExperimentKind::spectrum:
      check_payload(system, "system");
      if (spectrum_points < 8)
        problems.push_back("spectrum.points must be >= 8");
      if (spectrum_halfspan == 0.0 ||
          (spectrum_halfspan > 0.0 && !std::isfinite(spectrum_halfspan)))
        problems.push_back("spectrum.halfspan must be positive or omitted");
      if (spectrum_halfspan < 0.0 &&
          system.rates.kappa_down - system.rates.kappa_up <= 0.0)
        problems.push_back(
            "spectrum.halfspan must be given when the mode has no net "
            "damping");
      break;
  }

  if (workers < 1) problems.push_back("run.workers must be >= 1");
  if (!(point_timeout_s >= 0.0) || !std::isfinite(point_timeout_s))
    problems.push_back("run.point_timeout_s must be >= 0");
  if (out_dir.empty()) {
    problems.push_back("run.out must be non-empty");
  } else {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const auto probe = std::filesystem::path(out_dir) / ".write_probe";
    std::ofstream test(probe);
    if (ec || !test) {
      problems.push_back("output directory '" + out_dir + "' is not writable");
    } else {
      test.close();
      std::filesystem::remove(probe, ec);
    }
  }

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
}

namespace {

void append_system(std::string& out, const SystemSpec& s,
                   QubitBranch branch) {
  out += "system.omega_m=" + fmt(s.omega_m) + "\n";
  out += "system.omega_r=" + fmt(s.Omega_R) + "\n";
  out += "system.delta_nu=" + fmt(s.delta_nu) + "\n";
  out += "system.lambda=" + fmt(s.lambda) + "\n";
  out += "system.gamma_e_b0=" + fmt(s.gamma_e_B0) + "\n";
  out += "system.gamma_e_b1=" + fmt(s.gamma_e_B1) + "\n";
  out += "system.n_fock=" + std::to_string(s.n_fock) + "\n";
  out += "system.n_th=" + fmt(s.n_th) + "\n";
  out += "system.kappa_down=" + fmt(s.rates.kappa_down) + "\n";
  out += "system.kappa_up=" + fmt(s.rates.kappa_up) + "\n";
  out += "system.gamma_down=" + fmt(s.rates.gamma_down) + "\n";
  out += "system.gamma_up=" + fmt(s.rates.gamma_up) + "\n";
  out += "system.gamma_phi=" + fmt(s.rates.gamma_phi) + "\n";
  out += std::string("system.branch=") +
         (branch == QubitBranch::up ? "up" : "down") + "\n";
}

void append_pair(std::string& out, const TwoQubitSpec& p) {
  out += "pair.omega_m=" + fmt(p.omega_m) + "\n";
  out += "pair.n_fock=" + std::to_string(p.n_fock) + "\n";
  out += "pair.n_th=" + fmt(p.n_th) + "\n";
  out += "pair.kappa_down=" + fmt(p.kappa_down) + "\n";
  out += "pair.kappa_up=" + fmt(p.kappa_up) + "\n";
  for (int k = 0; k < 2; ++k) {
    const std::string q = "qubit" + std::to_string(k + 1) + ".";
    out += q + "omega_r=" + fmt(p.qubit[k].Omega_R) + "\n";
    out += q + "delta_nu=" + fmt(p.qubit[k].delta_nu) + "\n";
    out += q + "lambda=" + fmt(p.qubit[k].lambda) + "\n";
    out += q + "gamma_down=" + fmt(p.qubit[k].gamma_down) + "\n";
    out += q + "gamma_up=" + fmt(p.qubit[k].gamma_up) + "\n";
    out += q + "gamma_phi=" + fmt(p.qubit[k].gamma_phi) + "\n";
  }
}

}  // namespace

std::string canonical_text(const RunConfig& c) {
  std::string out;
  out += "kind=" + kind_name(c.kind) + "\n";
  out += "seed=" + std::to_string(c.seed) + "\n";
  out += "point_timeout_s=" + fmt(c.point_timeout_s) + "\n";

  switch (c.kind) {
    case ExperimentKind::eigen_map:
      append_system(out, c.system, c.branch);
      out += "grid.omega_r=" + fmt_grid(c.omega_r_grid) + "\n";
      out += "grid.delta_nu=" + fmt_grid(c.delta_nu_grid) + "\n";
      break;
    case ExperimentKind::shift_sweep:
      append_system(out, c.system, c.branch);
      out += "grid.lambda=" + fmt_grid(c.lambda_grid) + "\n";
      break;
    case ExperimentKind::threshold_map:
      append_system(out, c.system, c.branch);
      out += "grid.delta_r=" + fmt_grid(c.delta_r_grid) + "\n";
      out += "grid.delta_nu=" + fmt_grid(c.delta_nu_grid) + "\n";
      out += "target_shift=" + fmt(c.target_shift) + "\n";
      break;
    case ExperimentKind::gate_sweep:
      append_pair(out, c.pair);
      out += "grid.lambda=" + fmt_grid(c.lambda_grid) + "\n";
      out += "grid.delta_r=" + fmt_grid(c.delta_r_grid) + "\n";
      out += "gate_gamma_pct=" + fmt(c.gate_gamma_pct) + "\n";
      break;
    case ExperimentKind::gamma_sweep:
      append_pair(out, c.pair);
      out += "grid.lambda=" + fmt_grid(c.lambda_grid) + "\n";
      out += "grid.delta_r=" + fmt_grid(c.delta_r_grid) + "\n";
      out += "grid.gamma_pct=" + fmt_grid(c.gamma_pct_grid) + "\n";
      break;
    case ExperimentKind::donor_coupling:
      out += "donor.species_file=" + c.donor.species_file + "\n";
      out += "donor.profile_file=" + c.donor.profile_file + "\n";
      out += std::string("donor.profile_kind=") +
             (c.donor.profile_kind == FieldProfile::Kind::gradient
                  ? "gradient"
                  : "strain") +
             "\n";
      out += "donor.b_bias=" + fmt(c.donor.b_bias) + "\n";
      out += "donor.pair_lower=" + std::to_string(c.donor.pair.lower) + "\n";
      out += "donor.pair_upper=" + std::to_string(c.donor.pair.upper) + "\n";
      out += "donor.x_zpf=" + fmt(c.donor.mode.x_zpf) + "\n";
      out += "donor.mode_omega_m=" + fmt(c.donor.mode.omega_m) + "\n";
      out += "donor.m_eff=" + fmt(c.donor.mode.m_eff) + "\n";
      out += "donor.ensemble_n=" + std::to_string(c.donor.ensemble_n) + "\n";
      out += "grid.distance=" + fmt_grid(c.distance_grid) + "\n";
      break;
    case ExperimentKind::spectrum:
      append_system(out, c.system, c.branch);
      out += "spectrum.center=" + fmt(c.spectrum_center) + "\n";
      out += "spectrum.halfspan=" + fmt(c.spectrum_halfspan) + "\n";
      out += "spectrum.points=" + std::to_string(c.spectrum_points) + "\n";
      break;
  }
  return out;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fingerprint(const RunConfig& config) {
  return fnv1a(canonical_text(config));
}

}  // namespace spinmech
