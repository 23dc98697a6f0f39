#include "spinmech/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "spinmech/errors.hpp"

namespace spinmech {

namespace {

constexpr double kSignificantWeight = 0.01;  // fraction of total mode weight
constexpr double kProminence = 0.05;         // peak significance threshold

// Integral of exp(z tau) over [0, T]; series branch keeps z -> 0 smooth.
Complex windowed_integral(Complex z, double T) {
  const Complex zt = z * T;
  if (std::abs(zt) < 1e-6) {
    return T * (1.0 + zt / 2.0 + zt * zt / 6.0);
  }
  return (std::exp(zt) - 1.0) / z;
}

double one_sided_transform(const ModeSum& modes, double apod, double T,
                           double omega) {
  Complex acc = 0.0;
  for (int j = 0; j < modes.size(); ++j) {
    const Complex z = modes.rates[j] - apod + Complex(0.0, omega);
    acc += modes.weights[j] * windowed_integral(z, T);
  }
  return 2.0 * acc.real();
}

// Symmetrized spectrum from the exponential-mode representation of the
// correlation function. The finite window and apodization are exact here;
// only the mode decomposition itself carries numerical error.
Spectrum spectrum_from_modes(const ModeSum& modes,
                             const std::vector<double>& omega_grid, double T,
                             double apod, double tail_tol) {
  const double c0 = std::abs(modes.eval(0.0));
  if (c0 < 1e-300) {
    throw WindowError("correlation vanishes at zero delay");
  }
  const double tail = std::abs(modes.eval(T)) * std::exp(-apod * T);
  if (tail > tail_tol * c0) {
    throw WindowError(
        "correlation tail " + std::to_string(tail / c0) +
        " of its zero-delay value at the window end exceeds tolerance " +
        std::to_string(tail_tol));
  }
  Spectrum out;
  out.omega_grid = omega_grid;
  out.values.resize(omega_grid.size());
  for (std::size_t i = 0; i < omega_grid.size(); ++i) {
    const double sp = one_sided_transform(modes, apod, T, omega_grid[i]);
    const double sm = one_sided_transform(modes, apod, T, -omega_grid[i]);
    out.values[i] = 0.5 * (sp + sm);
  }
  out.window_time = T;
  out.apod_rate = apod;
  // No nonnegativity enforcement here: a non-stationary initial state gives
  // the correlation modes complex weights, and their windowed transforms
  // carry dispersive admixtures that legitimately dip negative. Broken
  // decompositions are caught by the eigenbasis residual check instead.
  return out;
}

std::vector<int> significant_modes(const ModeSum& modes) {
  double total = 0.0;
  for (int j = 0; j < modes.size(); ++j) total += std::abs(modes.weights[j]);
  std::vector<int> idx;
  for (int j = 0; j < modes.size(); ++j) {
    if (std::abs(modes.weights[j]) >= kSignificantWeight * total) {
      idx.push_back(j);
    }
  }
  return idx;
}

// Interior local maxima whose prominence over the scanned floor exceeds the
// significance threshold. Flat runs count once.
std::vector<std::size_t> significant_maxima(const std::vector<double>& v,
                                            std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> peaks;
  if (hi - lo < 3) return peaks;
  double vmax = v[lo];
  double vmin = v[lo];
  for (std::size_t i = lo; i < hi; ++i) {
    vmax = std::max(vmax, v[i]);
    vmin = std::min(vmin, v[i]);
  }
  const double floor_level = vmin + kProminence * (vmax - vmin);
  for (std::size_t i = lo + 1; i + 1 < hi; ++i) {
    if (v[i] >= v[i - 1] && v[i] > v[i + 1] && v[i] > floor_level) {
      peaks.push_back(i);
    }
  }
  return peaks;
}

struct ModeScales {
  double gamma_min = 0.0;   // slowest significant decay
  double narrowest = 0.0;   // narrowest significant observed width (pre-apod)
  double peak_rate = 0.0;   // decay of the mode nearest the requested line
  double peak_freq = 0.0;
};

ModeScales classify_modes(const ModeSum& modes, double line_center) {
  const std::vector<int> sig = significant_modes(modes);
  if (sig.empty()) {
    throw WindowError("correlation carries no significant modes");
  }
  ModeScales scales;
  scales.gamma_min = std::numeric_limits<double>::infinity();
  double fastest = 0.0;
  for (int j : sig) {
    const double g = std::abs(modes.rates[j].real());
    scales.gamma_min = std::min(scales.gamma_min, g);
    fastest = std::max(fastest, g);
  }
  if (scales.gamma_min <= 1e-12 * fastest) scales.gamma_min = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int j : sig) {
    const double freq = -modes.rates[j].imag();
    const double dist = std::abs(freq - line_center);
    if (dist < best) {
      best = dist;
      scales.peak_rate = std::abs(modes.rates[j].real());
      scales.peak_freq = freq;
    }
  }
  scales.narrowest = scales.gamma_min;
  return scales;
}

double lorentzian(double x, double A, double c, double h, double b) {
  const double d = x - c;
  return A * h * h / (d * d + h * h) + b;
}

}  // namespace

Spectrum spectral_density(const LindbladModel& model, const State& rho0,
                          const Operator& x,
                          const std::vector<double>& omega_grid,
                          const SpectrumOptions& opts) {
  model.validate();
  if (rho0.space != model.space()) {
    throw DimensionError("initial state lives on a different space");
  }
  if (x.space != model.space()) {
    throw DimensionError("observable lives on a different space");
  }
  rho0.validate();
  if (omega_grid.size() < 2) {
    throw PreconditionError("frequency grid needs at least two points");
  }
  for (std::size_t i = 0; i + 1 < omega_grid.size(); ++i) {
    if (!(omega_grid[i + 1] > omega_grid[i])) {
      throw PreconditionError("frequency grid must be strictly increasing");
    }
  }

  Liouvillian lio(model);
  const Matrix initial = x.matrix * rho0.rho;
  const ModeSum modes = lio.correlation_modes(x, initial);

  const double mid =
      0.5 * (omega_grid.front() + omega_grid.back());
  const ModeScales scales = classify_modes(modes, mid);
  double apod = opts.apod_rate;
  if (apod < 0.0) {
    if (scales.gamma_min == 0.0) {
      throw WindowError(
          "undamped correlation: apodization rate cannot be inferred");
    }
    apod = scales.gamma_min / 10.0;
  }
  const double T = opts.window_time > 0.0
                       ? opts.window_time
                       : 10.0 / (scales.gamma_min + apod);
  // Each grid value is a closed-form transform, so coarse grids tabulate
  // fine; they just may straddle a line, which is the caller's tradeoff.
  return spectrum_from_modes(modes, omega_grid, T, apod, opts.tail_tol);
}

PeakFit fit_peak(const Spectrum& spectrum, const SearchWindow& window) {
  if (!(window.hi > window.lo)) {
    throw PreconditionError("search window is empty");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < spectrum.omega_grid.size(); ++i) {
    const double w = spectrum.omega_grid[i];
    if (w >= window.lo && w <= window.hi) {
      xs.push_back(w);
      ys.push_back(spectrum.values[i]);
    }
  }
  if (xs.size() < 8) {
    throw PreconditionError("search window covers fewer than 8 grid points");
  }
  const std::vector<std::size_t> peaks = significant_maxima(ys, 0, xs.size());
  if (peaks.empty()) {
    throw AmbiguousPeakError("no interior peak inside the search window");
  }
  if (peaks.size() > 1) {
    throw AmbiguousPeakError(
        "search window contains " + std::to_string(peaks.size()) +
        " significant peaks");
  }

  const std::size_t ip = peaks.front();
  double b = *std::min_element(ys.begin(), ys.end());
  double A = ys[ip] - b;
  double c = xs[ip];
  const double half_level = b + 0.5 * A;
  double left = xs.front();
  double right = xs.back();
  for (std::size_t i = ip; i-- > 0;) {
    if (ys[i] < half_level) {
      left = xs[i];
      break;
    }
  }
  for (std::size_t i = ip + 1; i < xs.size(); ++i) {
    if (ys[i] < half_level) {
      right = xs[i];
      break;
    }
  }
  double h = std::max(0.5 * (right - left), xs[1] - xs[0]);

  // Levenberg-Marquardt on (A, c, h, b); diagonal scaling keeps the mixed
  // parameter magnitudes benign.
  const std::size_t n = xs.size();
  auto cost = [&](double A_, double c_, double h_, double b_) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = lorentzian(xs[i], A_, c_, h_, b_) - ys[i];
      s += r * r;
    }
    return s;
  };
  double mu = 1e-3;
  double current = cost(A, c, h, b);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd J(n, 4);
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = xs[i] - c;
      const double D = d * d + h * h;
      J(i, 0) = h * h / D;
      J(i, 1) = A * h * h * 2.0 * d / (D * D);
      J(i, 2) = 2.0 * A * h * d * d / (D * D);
      J(i, 3) = 1.0;
      r(i) = lorentzian(xs[i], A, c, h, b) - ys[i];
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool stepped = false;
    for (int tries = 0; tries < 25; ++tries) {
      Eigen::MatrixXd M = JtJ;
      M.diagonal() += mu * JtJ.diagonal().cwiseMax(1e-300);
      const Eigen::VectorXd delta = M.ldlt().solve(-g);
      double A2 = A + delta(0);
      double c2 = std::clamp(c + delta(1), window.lo, window.hi);
      double h2 = std::abs(h + delta(2));
      double b2 = b + delta(3);
      if (h2 == 0.0) h2 = h * 0.5;
      const double next = cost(A2, c2, h2, b2);
      if (next <= current) {
        const double gain = current - next;
        A = A2;
        c = c2;
        h = h2;
        b = b2;
        current = next;
        mu = std::max(mu / 3.0, 1e-12);
        stepped = true;
        if (gain <= 1e-15 * (current + 1e-300)) iter = 200;
        break;
      }
      mu *= 10.0;
    }
    if (!stepped) break;
  }

  PeakFit fit;
  fit.center = c;
  fit.width = 2.0 * h - 2.0 * spectrum.apod_rate;
  if (fit.width <= 0.0) {
    throw SolverError("apodization broadening exceeds the fitted line width");
  }
  fit.amplitude = A;
  fit.offset = b;
  fit.residual_norm = std::sqrt(current);
  return fit;
}

double analytic_shift(double lambda, double Omega_R, double omega_m) {
  if (!std::isfinite(lambda) || !std::isfinite(Omega_R) ||
      !std::isfinite(omega_m)) {
    throw InvalidParameterError("shift arguments must be finite");
  }
  if (omega_m <= 0.0 || Omega_R < 0.0) {
    throw InvalidParameterError(
        "mechanical frequency must be positive and the Rabi frequency "
        "non-negative");
  }
  const double denom = omega_m * omega_m - Omega_R * Omega_R;
  if (std::abs(denom) < 1e-12 * omega_m * omega_m) {
    throw DivergenceError("shift diverges at the mechanical resonance");
  }
  return lambda * lambda * Omega_R / (2.0 * denom);
}

double eigen_shift(const SystemSpec& spec) {
  spec.validate();
  const Operator H = build_qm_dressed(spec);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H.matrix);
  if (es.info() != Eigen::Success) {
    throw SolverError("eigensolver failed on the rotating-frame Hamiltonian");
  }
  Eigen::Matrix2cd hq;
  hq << 0.5 * spec.Omega_R, 0.5 * spec.delta_nu,  //
      0.5 * spec.delta_nu, -0.5 * spec.Omega_R;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eq(hq);
  const Eigen::Vector2cd plus = eq.eigenvectors().col(1);  // upper branch

  const int nf = spec.n_fock;
  const int dim = 2 * nf;
  auto locate = [&](int n_mech) {
    Vector target = Vector::Zero(dim);
    target(0 * nf + n_mech) = plus(0);
    target(1 * nf + n_mech) = plus(1);
    int best = -1;
    double best_ov = -1.0;
    for (int k = 0; k < dim; ++k) {
      const double ov = std::norm(target.dot(es.eigenvectors().col(k)));
      if (ov > best_ov) {
        best_ov = ov;
        best = k;
      }
    }
    if (best_ov < 0.5) {
      throw LabelingError(
          "eigenstate overlap with the uncoupled product " +
          std::to_string(best_ov) + " falls below 0.5");
    }
    return best;
  };
  const int k0 = locate(0);
  const int k1 = locate(1);
  if (k0 == k1) {
    throw LabelingError("two uncoupled products map to the same eigenstate");
  }
  return (es.eigenvalues()(k1) - es.eigenvalues()(k0)) - spec.omega_m;
}

double simulated_shift(const SystemSpec& spec, QubitBranch branch) {
  spec.validate();
  const double kappa_net = spec.rates.kappa_down - spec.rates.kappa_up;
  if (kappa_net <= 0.0) {
    throw PreconditionError(
        "shift extraction needs net mechanical damping to set a line width");
  }
  const LindbladModel model = dressed_model(spec);
  const HilbertSpace space = spec.space();
  const int nf = spec.n_fock;

  Eigen::Matrix2cd qubit = Eigen::Matrix2cd::Zero();
  qubit(branch == QubitBranch::up ? 0 : 1,
        branch == QubitBranch::up ? 0 : 1) = 1.0;
  const State th = thermal_state(nf, spec.n_th);
  const Matrix rho0 = Eigen::kroneckerProduct(qubit, th.rho).eval();

  const Operator a = lift(space, 1, fock_destroy(nf));
  const Operator x = a + a.adjoint();

  Liouvillian lio(model);
  const ModeSum modes = lio.correlation_modes(x, x.matrix * rho0);
  const ModeScales scales = classify_modes(modes, spec.omega_m);

  const double apod = kappa_net / 20.0;
  const double T = 10.0 / (scales.gamma_min + apod);
  const double w_obs = 2.0 * (scales.peak_rate + apod);
  const double narrowest = 2.0 * (scales.narrowest + apod);

  const double omega_eff = std::hypot(spec.Omega_R, spec.delta_nu);
  double expected = 0.5 * spec.lambda;
  const double det = std::abs(spec.omega_m - omega_eff);
  if (det > spec.lambda && omega_eff > 0.0) {
    expected = spec.lambda * spec.lambda * omega_eff /
               (2.0 * std::abs(spec.omega_m * spec.omega_m -
                               omega_eff * omega_eff));
  }
  const double half_span = std::max(30.0 * w_obs, 4.0 * expected + 10.0 * w_obs);
  const double spacing = std::min(w_obs, narrowest) / 12.0;
  const int half_pts = static_cast<int>(std::ceil(half_span / spacing));
  std::vector<double> grid(2 * half_pts + 1);
  for (int i = -half_pts; i <= half_pts; ++i) {
    grid[i + half_pts] = spec.omega_m + i * spacing;
  }

  const Spectrum sp = spectrum_from_modes(modes, grid, T, apod, 1e-3);
  const std::vector<std::size_t> peaks =
      significant_maxima(sp.values, 0, sp.values.size());
  if (peaks.empty()) {
    throw AmbiguousPeakError("no peak found near the mechanical frequency");
  }
  std::size_t pick = peaks.front();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t ip : peaks) {
    const double dist = std::abs(sp.omega_grid[ip] - spec.omega_m);
    if (dist < best) {
      best = dist;
      pick = ip;
    }
  }
  const double peak_omega = sp.omega_grid[pick];
  double half_window = 10.0 * w_obs;
  for (std::size_t ip : peaks) {
    if (ip == pick) continue;
    half_window =
        std::min(half_window, 0.5 * std::abs(sp.omega_grid[ip] - peak_omega));
  }
  half_window = std::max(half_window, 5.0 * spacing);
  SearchWindow window{std::max(peak_omega - half_window, grid.front()),
                      std::min(peak_omega + half_window, grid.back())};
  const PeakFit fit = fit_peak(sp, window);
  return fit.center - spec.omega_m;
}

namespace {

double abs_shift_at(SystemSpec spec, double lambda) {
  spec.lambda = lambda;
  return std::abs(simulated_shift(spec, QubitBranch::up));
}

}  // namespace

double threshold_min_lambda(const SystemSpec& base, double delta_r,
                            double delta_nu, double target_shift,
                            const ThresholdOptions& opts) {
  if (!(target_shift > 0.0) || !std::isfinite(target_shift)) {
    throw InvalidParameterError("target shift must be positive and finite");
  }
  SystemSpec spec = base;
  spec.Omega_R = base.omega_m + delta_r;
  spec.delta_nu = delta_nu;
  if (spec.Omega_R < 0.0) {
    throw InvalidParameterError(
        "detuning drives the Rabi frequency negative");
  }
  spec.gamma_e_B1 = 2.0 * spec.Omega_R;  // keep the drive calibration coherent

  const double omega_eff = std::hypot(spec.Omega_R, spec.delta_nu);
  const double denom = std::abs(spec.omega_m * spec.omega_m -
                                omega_eff * omega_eff);
  double est;
  if (omega_eff > 0.0 && denom > 1e-9 * spec.omega_m * spec.omega_m) {
    est = std::sqrt(2.0 * denom * target_shift / omega_eff);
  } else {
    est = 1e-3 * spec.omega_m;
  }

  double lo = est / 3.0;
  double hi = est * 3.0;
  double flo = abs_shift_at(spec, lo);
  double fhi = abs_shift_at(spec, hi);
  int growth = 0;
  while (fhi < target_shift && growth < opts.max_bracket_growth) {
    lo = hi;
    flo = fhi;
    hi *= 3.0;
    fhi = abs_shift_at(spec, hi);
    ++growth;
  }
  while (flo > target_shift && growth < opts.max_bracket_growth) {
    hi = lo;
    fhi = flo;
    lo /= 3.0;
    flo = abs_shift_at(spec, lo);
    ++growth;
  }
  if (!(flo <= target_shift && fhi >= target_shift)) {
    throw RangeError("could not bracket the target shift in coupling");
  }

  const double mid = std::sqrt(lo * hi);
  const double fmid = abs_shift_at(spec, mid);
  if (!(flo <= fmid && fmid <= fhi)) {
    throw RangeError("shift is not locally monotonic in the coupling");
  }
  if (fmid < target_shift) {
    lo = mid;
  } else {
    hi = mid;
  }

  for (int iter = 0; iter < 60 && (hi - lo) > opts.lambda_rel_tol * hi;
       ++iter) {
    const double m = 0.5 * (lo + hi);
    if (abs_shift_at(spec, m) < target_shift) {
      lo = m;
    } else {
      hi = m;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<ThresholdPoint> threshold_sweep(
    const std::vector<double>& delta_r_grid,
    const std::vector<double>& delta_nu_grid, double target_shift,
    const SystemSpec& base, const ThresholdOptions& opts) {
  std::vector<ThresholdPoint> out;
  out.reserve(delta_r_grid.size() * delta_nu_grid.size());
  for (double dr : delta_r_grid) {
    for (double dn : delta_nu_grid) {
      ThresholdPoint pt;
      pt.delta_r = dr;
      pt.delta_nu = dn;
      try {
        pt.lambda_min = threshold_min_lambda(base, dr, dn, target_shift, opts);
        pt.ok = true;
      } catch (const std::exception& e) {
        pt.lambda_min = std::numeric_limits<double>::quiet_NaN();
        pt.ok = false;
        pt.note = e.what();
      }
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace spinmech
