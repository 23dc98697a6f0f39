#include "spinmech/donors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "spinmech/errors.hpp"

namespace spinmech {

namespace {

constexpr double kHbar = 1.054571817e-34;  // [J s]

bool finite(double x) { return std::isfinite(x); }

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// Angular-momentum matrices for spin j in the basis m = j, j-1, ..., -j
// (index 0 carries the largest projection).
Matrix spin_z(double j) {
  const int d = static_cast<int>(std::lround(2.0 * j + 1.0));
  Matrix jz = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) jz(k, k) = j - k;
  return jz;
}

Matrix spin_raise(double j) {
  const int d = static_cast<int>(std::lround(2.0 * j + 1.0));
  Matrix jp = Matrix::Zero(d, d);
  for (int k = 1; k < d; ++k) {
    const double m = j - k;  // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>
    jp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  return jp;
}

Eigen::VectorXd sorted_levels(const DonorSpecies& species, double B) {
  const Operator h = spin_hamiltonian(species, B);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix,
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw SolverError("donor level diagonalization failed");
  return solver.eigenvalues();  // ascending
}

void check_pair(const DonorSpecies& species, LevelPair pair) {
  const int n = species.levels();
  if (pair.lower < 0 || pair.upper >= n || pair.lower >= pair.upper)
    throw InvalidParameterError("level pair must satisfy 0 <= lower < upper < " +
                                std::to_string(n));
}

double pair_gap(const DonorSpecies& species, double B, LevelPair pair) {
  const Eigen::VectorXd e = sorted_levels(species, B);
  return e[pair.upper] - e[pair.lower];
}

// Centered difference of the pair gap with step h.
double central_slope(const DonorSpecies& species, double B, LevelPair pair,
                     double h) {
  return (pair_gap(species, B + h, pair) - pair_gap(species, B - h, pair)) /
         (2.0 * h);
}

struct Pchip {
  std::vector<double> x, y, slope;
};

// Fritsch-Carlson slopes: shape-preserving, exact on linear data.
Pchip build_pchip(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  Pchip p{x, y, std::vector<double>(n, 0.0)};
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    p.slope[0] = p.slope[1] = delta[0];
    return p;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      p.slope[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      p.slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0)
      m = 0.0;
    else if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0))
      m = 3.0 * d0;
    return m;
  };
  p.slope[0] = endpoint(h[0], h[1], delta[0], delta[1]);
  p.slope[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return p;
}

double eval_pchip(const Pchip& p, double q) {
  const auto it = std::upper_bound(p.x.begin(), p.x.end(), q);
  std::size_t i = (it == p.x.begin()) ? 0 : (it - p.x.begin()) - 1;
  if (i + 1 >= p.x.size()) i = p.x.size() - 2;
  const double h = p.x[i + 1] - p.x[i];
  const double t = (q - p.x[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * p.y[i] + h10 * h * p.slope[i] + h01 * p.y[i + 1] +
         h11 * h * p.slope[i + 1];
}

std::string kind_name(FieldProfile::Kind kind) {
  return kind == FieldProfile::Kind::gradient ? "gradient" : "strain";
}

}  // namespace

int DonorSpecies::levels() const {
  return static_cast<int>(std::lround(2.0 * nuclear_spin + 1.0)) * 2;
}

void DonorSpecies::validate() const {
  if (!finite(gamma_e) || gamma_e <= 0.0)
    throw InvalidParameterError("gamma_e must be positive");
  if (!finite(nuclear_spin) || nuclear_spin < 0.0)
    throw InvalidParameterError("nuclear spin must be >= 0");
  const double twice = 2.0 * nuclear_spin;
  if (std::abs(twice - std::lround(twice)) > 1e-9)
    throw InvalidParameterError("nuclear spin must be integer or half-integer");
  if (!finite(gamma_n) || !finite(A_hf) || !finite(strain_coeff))
    throw InvalidParameterError("species parameters must be finite");
}

void FieldProfile::validate() const {
  if (distance.size() != value.size())
    throw ValidationError("profile columns must have equal length");
  if (distance.size() < 2)
    throw ValidationError("profile needs at least two samples");
  for (std::size_t i = 0; i < distance.size(); ++i) {
    if (!finite(distance[i]) || !finite(value[i]))
      throw ValidationError("profile samples must be finite");
    if (i > 0 && distance[i] <= distance[i - 1])
      throw ValidationError("profile distances must be strictly increasing");
  }
}

void MechanicalMode::validate() const {
  if (!finite(x_zpf) || x_zpf <= 0.0)
    throw InvalidParameterError("x_zpf must be positive");
  if (!finite(omega_m) || omega_m <= 0.0)
    throw InvalidParameterError("omega_m must be positive");
  if (m_eff >= 0.0) {
    if (!finite(m_eff) || m_eff == 0.0)
      throw InvalidParameterError("m_eff must be positive when given");
    const double predicted = std::sqrt(kHbar / (2.0 * m_eff * omega_m));
    if (std::abs(x_zpf - predicted) > 0.05 * predicted)
      throw InvalidParameterError(
          "x_zpf disagrees with sqrt(hbar / (2 m_eff omega_m)) by more "
          "than 5%");
  }
}

Operator spin_hamiltonian(const DonorSpecies& species, double B) {
  species.validate();
  if (!finite(B) || B < 0.0)
    throw InvalidParameterError("field must be finite and >= 0");

  const double I = species.nuclear_spin;
  const HilbertSpace space{{species.levels()}};
  if (I == 0.0) {
    Matrix h = 0.5 * species.gamma_e * B * pauli(Axis::z).matrix;
    return Operator{space, std::move(h)};
  }

  const int dn = static_cast<int>(std::lround(2.0 * I + 1.0));
  const Matrix in = Matrix::Identity(dn, dn);
  const Matrix i2 = Matrix::Identity(2, 2);
  const Matrix iz = spin_z(I), ip = spin_raise(I);
  const Matrix sz = spin_z(0.5), sp = spin_raise(0.5);

  // A I.S = A (Iz Sz + (I+ S- + I- S+) / 2)
  Matrix h = species.A_hf *
             (kron(iz, sz) + 0.5 * (kron(ip, sp.adjoint()) +
                                    kron(ip.adjoint(), sp)));
  h += species.gamma_e * B * kron(in, sz);
  h -= species.gamma_n * B * kron(iz, i2);
  return Operator{space, std::move(h)};
}

double transition_frequency(const DonorSpecies& species, double B,
                            LevelPair pair) {
  check_pair(species, pair);
  return pair_gap(species, B, pair);
}

double transition_gradient(const DonorSpecies& species, double B,
                           LevelPair pair) {
  check_pair(species, pair);
  if (!finite(B) || B <= 0.0)
    throw InvalidParameterError("gradient needs a positive field");
  const double h = std::max(1e-6, 1e-6 * B);
  if (B - h <= 0.0)
    throw PreconditionError("field too small for the difference stencil");

  const double coarse = central_slope(species, B, pair, h);
  const double fine = central_slope(species, B, pair, 0.5 * h);
  const double refined = (4.0 * fine - coarse) / 3.0;
  // The two step sizes agree to O(h^2) on a smooth gap; a crossing inside
  // the stencil breaks that by a slope-scale amount. The floor keeps
  // eigenvalue rounding from tripping the check.
  const double scale = std::max(std::abs(coarse), std::abs(fine));
  const double noise_floor =
      1e-13 *
      (species.gamma_e * B +
       std::abs(species.A_hf) * (species.nuclear_spin + 1.0)) /
      h;
  const double tol = std::max(0.02 * scale, std::max(noise_floor, 1e-2));
  if (std::abs(fine - coarse) > tol)
    throw StencilError("level crossing inside the difference stencil near B=" +
                       std::to_string(B));
  return refined;
}

double find_transition_field(const DonorSpecies& species, LevelPair pair,
                             double target_freq, double b_lo, double b_hi) {
  check_pair(species, pair);
  if (!finite(target_freq) || target_freq <= 0.0)
    throw InvalidParameterError("target frequency must be positive");
  if (!finite(b_lo) || !finite(b_hi) || b_lo < 0.0 || b_hi <= b_lo)
    throw InvalidParameterError("need 0 <= b_lo < b_hi");

  double f_lo = pair_gap(species, b_lo, pair) - target_freq;
  double f_hi = pair_gap(species, b_hi, pair) - target_freq;
  if (f_lo == 0.0) return b_lo;
  if (f_hi == 0.0) return b_hi;
  if (f_lo * f_hi > 0.0)
    throw RangeError("target frequency not bracketed by the field interval");

  double lo = b_lo, hi = b_hi;
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = pair_gap(species, mid, pair) - target_freq;
    if (f_mid == 0.0) return mid;
    if (f_lo * f_mid < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  return 0.5 * (lo + hi);
}

double gradient_coupling(const DonorSpecies& species,
                         const MechanicalMode& mode, double grad_b,
                         double b_bias, LevelPair pair) {
  mode.validate();
  if (!finite(grad_b) || grad_b < 0.0)
    throw InvalidParameterError("field gradient must be finite and >= 0");
  return transition_gradient(species, b_bias, pair) * grad_b * mode.x_zpf;
}

double strain_coupling(const DonorSpecies& species, double strain_per_zpf) {
  species.validate();
  if (!finite(strain_per_zpf))
    throw InvalidParameterError("strain per zero-point motion must be finite");
  return species.strain_coeff * strain_per_zpf;
}

double ensemble_coupling(double lambda_1, int n) {
  if (!finite(lambda_1) || lambda_1 < 0.0)
    throw InvalidParameterError("single-donor coupling must be >= 0");
  if (n < 1)
    throw InvalidParameterError("ensemble size must be a positive integer");
  return std::sqrt(static_cast<double>(n)) * lambda_1;
}

FieldProfile load_profile(const std::string& path, FieldProfile::Kind kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open profile file: " + path);

  FieldProfile profile;
  profile.kind = kind;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      if (profile.note.empty()) {
        auto text = line.substr(first + 1);
        const auto start = text.find_first_not_of(" \t");
        if (start != std::string::npos)
          profile.note = text.substr(start);
      }
      continue;
    }
    std::istringstream row(line);
    double d = 0.0, v = 0.0;
    std::string extra;
    if (!(row >> d >> v) || (row >> extra))
      throw ParseError("expected two numeric columns at line " +
                       std::to_string(line_no) + " of " + path);
    if (!finite(d) || !finite(v))
      throw ParseError("non-finite sample at line " + std::to_string(line_no) +
                       " of " + path);
    if (!profile.distance.empty() && d <= profile.distance.back())
      throw ParseError("distances must be strictly increasing at line " +
                       std::to_string(line_no) + " of " + path);
    profile.distance.push_back(d);
    profile.value.push_back(v);
  }
  if (profile.distance.size() < 2)
    throw ParseError("profile file " + path + " needs at least two samples");
  if (profile.note.empty())
    profile.note = kind_name(kind) + " profile from " + path;
  profile.validate();
  return profile;
}

double interp(const FieldProfile& profile, double x) {
  profile.validate();
  if (!finite(x)) throw InvalidParameterError("query point must be finite");
  if (x < profile.distance.front() || x > profile.distance.back())
    throw RangeError("query outside the tabulated range [" +
                     std::to_string(profile.distance.front()) + ", " +
                     std::to_string(profile.distance.back()) + "]");
  const Pchip p = build_pchip(profile.distance, profile.value);
  return eval_pchip(p, x);
}

DonorSpecies load_species(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open species file: " + path);

  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value at line " + std::to_string(line_no) +
                       " of " + path);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("empty key or value at line " + std::to_string(line_no) +
                       " of " + path);
    if (kv.count(key))
      throw ParseError("duplicate key '" + key + "' at line " +
                       std::to_string(line_no) + " of " + path);
    kv[key] = value;
  }

  auto number = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw ParseError("species file " + path + " is missing key '" + key +
                       "'");
    std::istringstream ss(it->second);
    double x = 0.0;
    std::string extra;
    if (!(ss >> x) || (ss >> extra))
      throw ParseError("value of '" + key + "' in " + path +
                       " is not a number");
    return x;
  };

  DonorSpecies species;
  const auto name_it = kv.find("name");
  species.name = (name_it == kv.end()) ? std::string() : name_it->second;
  species.gamma_e = number("gamma_e");
  species.gamma_n = number("gamma_n");
  species.nuclear_spin = number("I");
  species.A_hf = number("A_hf");
  species.strain_coeff = number("strain_coeff");

  for (const auto& [key, unused] : kv) {
    (void)unused;
    if (key != "name" && key != "gamma_e" && key != "gamma_n" && key != "I" &&
        key != "A_hf" && key != "strain_coeff")
      throw ParseError("unknown key '" + key + "' in species file " + path);
  }

  species.validate();
  return species;
}

}  // namespace spinmech
