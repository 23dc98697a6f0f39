#include "spinmech/gates.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "spinmech/errors.hpp"

namespace spinmech {

namespace {

constexpr int kDim = 4;         // two-qubit system dimension
constexpr int kChoiDim = 16;    // system ⊗ ancilla
constexpr double kTwoPi = 6.283185307179586476925286766559;

// vec of a 4x4 matrix in the (s, a) -> s*4 + a layout shared by the Choi
// index convention.
Vector vec_row_major(const Matrix& u) {
  Vector v(kChoiDim);
  for (int s = 0; s < kDim; ++s) {
    for (int a = 0; a < kDim; ++a) {
      v(s * kDim + a) = u(s, a);
    }
  }
  return v;
}

void require_choi_shape(const Matrix& choi) {
  if (choi.rows() != kChoiDim || choi.cols() != kChoiDim) {
    throw DimensionError("Choi matrix must be 16 x 16");
  }
}

void require_target_shape(const Matrix& target) {
  if (target.rows() != kDim || target.cols() != kDim) {
    throw DimensionError("gate target must be 4 x 4");
  }
}

double choi_bilinear(const Matrix& choi, const Vector& omega) {
  return (omega.adjoint() * choi * omega).value().real();
}

}  // namespace

void QuantumChannel::validate(double herm_tol, double cp_floor,
                              double tp_tol) const {
  require_choi_shape(choi);
  const double scale = std::max(1.0, choi.cwiseAbs().maxCoeff());
  const double herm = (choi - choi.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol * scale) {
    throw IntegrityError("Choi matrix is not Hermitian: deviation " +
                         std::to_string(herm));
  }
  const Matrix herm_part = 0.5 * (choi + choi.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm_part,
                                           Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < cp_floor) {
    throw IntegrityError("channel is not completely positive: eigenvalue " +
                         std::to_string(min_eig));
  }
  Matrix cond = Matrix::Zero(kDim, kDim);
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      Complex acc = 0.0;
      for (int s = 0; s < kDim; ++s) {
        acc += choi(s * kDim + a, s * kDim + b);
      }
      cond(a, b) = acc;
    }
  }
  const double tp_dev =
      (cond - Matrix::Identity(kDim, kDim)).cwiseAbs().maxCoeff();
  if (tp_dev > tp_tol) {
    throw IntegrityError("channel is not trace preserving: deviation " +
                         std::to_string(tp_dev));
  }
}

Matrix sqrt_iswap() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix u = Matrix::Identity(kDim, kDim);
  u(1, 1) = r;
  u(1, 2) = Complex(0.0, r);
  u(2, 1) = Complex(0.0, r);
  u(2, 2) = r;
  return u;
}

ChannelFamily::ChannelFamily(const TwoQubitSpec& spec) : spec_(spec) {
  spec_.validate();
  const LindbladModel model = two_qubit_model(spec_);
  const HilbertSpace space = model.space();
  Liouvillian lio(model);
  const int d = lio.hilbert_dim();
  const int n = lio.dim();

  evals_ = lio.eigenvalues();
  for (int k = 0; k < n; ++k) {
    // Spurious positive real parts from the eigensolver would blow up the
    // reconstruction at late times.
    evals_(k) = Complex(std::min(evals_(k).real(), 0.0), evals_(k).imag());
  }

  const Matrix& V = lio.eigenvectors();
  reduce_.resize(kChoiDim, n);
  for (int k = 0; k < n; ++k) {
    const Eigen::Map<const Matrix> mode(V.col(k).data(), d, d);
    const Matrix red = partial_trace(space, mode, {0, 1});
    reduce_.col(k) = Eigen::Map<const Vector>(red.data(), kChoiDim);
  }

  const State th = thermal_state(spec_.n_fock, spec_.n_th);
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      Matrix unit = Matrix::Zero(kDim, kDim);
      unit(a, b) = 1.0;
      const Matrix rho = Eigen::kroneckerProduct(unit, th.rho).eval();
      block_coeffs_[a * kDim + b] = lio.decompose(rho);
    }
  }
}

QuantumChannel ChannelFamily::channel_at(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw PreconditionError("interaction time must be finite and >= 0");
  }
  const int n = static_cast<int>(evals_.size());
  Vector phase(n);
  for (int k = 0; k < n; ++k) {
    phase(k) = std::exp(evals_(k) * t);
  }
  Matrix choi(kChoiDim, kChoiDim);
  for (int a = 0; a < kDim; ++a) {
    for (int b = 0; b < kDim; ++b) {
      const Vector w =
          reduce_ * phase.cwiseProduct(block_coeffs_[a * kDim + b]);
      for (int s = 0; s < kDim; ++s) {
        for (int sp = 0; sp < kDim; ++sp) {
          choi(s * kDim + a, sp * kDim + b) = w(s + kDim * sp);
        }
      }
    }
  }
  const Matrix herm = 0.5 * (choi + choi.adjoint());
  QuantumChannel channel{herm, {}};
  channel.validate();
  return channel;
}

QuantumChannel choi_from_dynamics(const TwoQubitSpec& spec, double t) {
  return ChannelFamily(spec).channel_at(t);
}

std::vector<Matrix> kraus_from_choi(const QuantumChannel& channel) {
  require_choi_shape(channel.choi);
  const Matrix herm = 0.5 * (channel.choi + channel.choi.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  if (es.info() != Eigen::Success) {
    throw SolverError("Choi eigendecomposition failed");
  }
  std::vector<Matrix> kraus;
  for (int k = 0; k < kChoiDim; ++k) {
    const double e = es.eigenvalues()(k);
    if (e < -1e-7) {
      throw IntegrityError(
          "channel is not completely positive: eigenvalue " +
          std::to_string(e));
    }
    if (e < 1e-9) continue;
    const double root = std::sqrt(e);
    Matrix K(kDim, kDim);
    for (int s = 0; s < kDim; ++s) {
      for (int a = 0; a < kDim; ++a) {
        K(s, a) = root * es.eigenvectors()(s * kDim + a, k);
      }
    }
    kraus.push_back(K);
  }
  Matrix completeness = Matrix::Zero(kDim, kDim);
  for (const Matrix& K : kraus) {
    completeness += K.adjoint() * K;
  }
  const double dev =
      (completeness - Matrix::Identity(kDim, kDim)).cwiseAbs().maxCoeff();
  if (dev > 1e-6) {
    throw IntegrityError(
        "Kraus completeness sum deviates from the identity by " +
        std::to_string(dev));
  }
  return kraus;
}

double avg_gate_fidelity(const QuantumChannel& channel, const Matrix& target) {
  require_choi_shape(channel.choi);
  require_target_shape(target);
  const double overlap = choi_bilinear(channel.choi, vec_row_major(target));
  return (kDim + overlap) / (kDim * kDim + kDim);
}

PhasedFidelity phase_compensated_fidelity(const QuantumChannel& channel,
                                          const Matrix& target) {
  require_choi_shape(channel.choi);
  require_target_shape(target);
  // Collapse the Choi bilinear over the ancilla index once; the remaining
  // phase search only touches a 4x4 Hermitian form.
  Matrix m = Matrix::Zero(kDim, kDim);
  for (int s = 0; s < kDim; ++s) {
    for (int sp = 0; sp < kDim; ++sp) {
      Complex acc = 0.0;
      for (int a = 0; a < kDim; ++a) {
        for (int b = 0; b < kDim; ++b) {
          acc += std::conj(target(s, a)) *
                 channel.choi(s * kDim + a, sp * kDim + b) * target(sp, b);
        }
      }
      m(s, sp) = acc;
    }
  }
  auto overlap = [&m](double phi1, double phi2) {
    Complex w[kDim];
    for (int s = 0; s < kDim; ++s) {
      const int q1 = s >> 1;
      const int q2 = s & 1;
      w[s] = std::exp(Complex(0.0, phi1 * q1 + phi2 * q2));
    }
    Complex acc = 0.0;
    for (int s = 0; s < kDim; ++s) {
      for (int sp = 0; sp < kDim; ++sp) {
        acc += w[s] * std::conj(w[sp]) * m(s, sp);
      }
    }
    return acc.real();
  };

  PhasedFidelity best;
  double best_overlap = -1.0;
  const int coarse = 24;
  for (int i = 0; i < coarse; ++i) {
    for (int j = 0; j < coarse; ++j) {
      const double p1 = kTwoPi * i / coarse;
      const double p2 = kTwoPi * j / coarse;
      const double v = overlap(p1, p2);
      if (v > best_overlap) {
        best_overlap = v;
        best.phi1 = p1;
        best.phi2 = p2;
      }
    }
  }
  double step = kTwoPi / coarse;
  for (int round = 0; round < 4; ++round) {
    const double c1 = best.phi1;
    const double c2 = best.phi2;
    for (int i = -4; i <= 4; ++i) {
      for (int j = -4; j <= 4; ++j) {
        const double p1 = c1 + step * i / 4.0;
        const double p2 = c2 + step * j / 4.0;
        const double v = overlap(p1, p2);
        if (v > best_overlap) {
          best_overlap = v;
          best.phi1 = p1;
          best.phi2 = p2;
        }
      }
    }
    step /= 4.0;
  }
  best.fidelity = (kDim + best_overlap) / (kDim * kDim + kDim);
  return best;
}

void GateResult::validate() const {
  if (!(fidelity <= 1.0 + 1e-9) || !(fidelity >= -1e-9)) {
    throw IntegrityError("gate fidelity " + std::to_string(fidelity) +
                         " escapes [0, 1]");
  }
  if (!(fidelity_uncompensated <= 1.0 + 1e-9) ||
      !(fidelity_uncompensated >= -1e-9)) {
    throw IntegrityError("gate fidelity " +
                         std::to_string(fidelity_uncompensated) +
                         " escapes [0, 1]");
  }
}

double dispersive_gate_time(const TwoQubitSpec& spec) {
  const double l1 = spec.qubit[0].lambda;
  const double l2 = spec.qubit[1].lambda;
  if (l1 == 0.0 || l2 == 0.0) {
    throw DivergenceError("gate time diverges without coupling");
  }
  const double d1 = spec.qubit[0].Omega_R - spec.omega_m;
  const double d2 = spec.qubit[1].Omega_R - spec.omega_m;
  if (d1 == 0.0 || d2 == 0.0) {
    throw DivergenceError(
        "dispersive gate time undefined on mechanical resonance");
  }
  if (d1 + d2 == 0.0) {
    throw DivergenceError(
        "exchange rate vanishes for opposite detunings");
  }
  return std::abs(kTwoPi * d1 * d2 / (l1 * l2 * (d1 + d2)));
}

GateResult optimal_gate_search(const TwoQubitSpec& spec,
                               const std::vector<double>& time_grid,
                               const GateSearchOptions& opts) {
  spec.validate();
  if (time_grid.size() < 2) {
    throw PreconditionError("time grid needs at least two points");
  }
  for (std::size_t i = 0; i + 1 < time_grid.size(); ++i) {
    if (!(time_grid[i + 1] > time_grid[i])) {
      throw PreconditionError("time grid must be strictly increasing");
    }
  }
  if (!(time_grid.front() >= 0.0)) {
    throw PreconditionError("time grid must be non-negative");
  }
  try {
    const double t_star = dispersive_gate_time(spec);
    if (time_grid.back() < 2.0 * t_star * (1.0 - 1e-12)) {
      throw PreconditionError(
          "time grid must span at least twice the dispersive gate time " +
          std::to_string(t_star));
    }
  } catch (const DivergenceError&) {
    // No dispersive estimate exists; any grid span is acceptable.
  }

  const ChannelFamily family(spec);
  const Matrix target = sqrt_iswap();

  struct Probe {
    double metric = -1.0;
    double fid = 0.0;
    double fid_raw = 0.0;
  };
  auto probe = [&](double t) {
    const QuantumChannel ch = family.channel_at(t);
    Probe p;
    p.fid_raw = avg_gate_fidelity(ch, target);
    p.fid = opts.compensate_phases
                ? phase_compensated_fidelity(ch, target).fidelity
                : p.fid_raw;
    p.metric = p.fid;
    return p;
  };

  std::size_t imax = 0;
  Probe best;
  std::vector<Probe> coarse(time_grid.size());
  for (std::size_t i = 0; i < time_grid.size(); ++i) {
    coarse[i] = probe(time_grid[i]);
    if (coarse[i].metric > best.metric) {
      best = coarse[i];
      imax = i;
    }
  }

  GateResult result;
  result.boundary_warning = (imax == 0 || imax + 1 == time_grid.size());
  result.optimal_time = time_grid[imax];

  const double lo = time_grid[imax == 0 ? 0 : imax - 1];
  const double hi =
      time_grid[std::min(imax + 1, time_grid.size() - 1)];
  const int refine = std::max(opts.refine_points, 3);
  if (hi > lo) {
    for (int k = 0; k < refine; ++k) {
      const double t = lo + (hi - lo) * k / (refine - 1);
      const Probe p = probe(t);
      if (p.metric > best.metric) {
        best = p;
        result.optimal_time = t;
      }
    }
  }

  result.fidelity = best.fid;
  result.fidelity_uncompensated = best.fid_raw;
  result.lambda = spec.qubit[0].lambda;
  result.delta_r = spec.qubit[0].Omega_R - spec.omega_m;
  result.delta_nu = spec.qubit[0].delta_nu;
  result.n_th = spec.n_th;
  result.validate();
  return result;
}

std::vector<GateResult> fidelity_sweep(const TwoQubitSpec& base,
                                       const std::vector<double>& lambda_grid,
                                       const std::vector<double>& delta_r_grid,
                                       double n_th, double gamma_pct,
                                       const GateSearchOptions& opts) {
  if (lambda_grid.empty() || delta_r_grid.empty()) {
    throw PreconditionError("sweep grids must be non-empty");
  }
  if (!(gamma_pct >= 0.0) || !std::isfinite(gamma_pct)) {
    throw InvalidParameterError("decay-rate percentage must be >= 0");
  }
  if (!(n_th >= 0.0) || !std::isfinite(n_th)) {
    throw InvalidParameterError("thermal occupation must be >= 0");
  }
  const double f = gamma_pct / 100.0;
  std::vector<GateResult> table;
  table.reserve(lambda_grid.size() * delta_r_grid.size());
  for (double lambda : lambda_grid) {
    for (double delta_r : delta_r_grid) {
      GateResult row;
      row.lambda = lambda;
      row.delta_r = delta_r;
      row.n_th = n_th;
      row.gamma_pct = gamma_pct;
      try {
        TwoQubitSpec spec = base;
        for (int k = 0; k < 2; ++k) {
          spec.qubit[k].lambda = lambda;
          spec.qubit[k].Omega_R = base.omega_m + delta_r;
          spec.qubit[k].gamma_down = base.qubit[k].gamma_down * f;
          spec.qubit[k].gamma_up = base.qubit[k].gamma_up * f;
          spec.qubit[k].gamma_phi = base.qubit[k].gamma_phi * f;
        }
        spec.kappa_down = base.kappa_down * f;
        spec.kappa_up = base.kappa_up * f;
        spec.n_th = n_th;
        spec.n_fock = std::max(
            base.n_fock, static_cast<int>(std::ceil(4.0 * n_th + 6.0)));
        const double t_star = dispersive_gate_time(spec);
        std::vector<double> grid(200);
        for (int i = 0; i < 200; ++i) {
          grid[i] = t_star * (0.05 + (2.2 - 0.05) * i / 199.0);
        }
        GateResult found = optimal_gate_search(spec, grid, opts);
        found.gamma_pct = gamma_pct;
        row = found;
      } catch (const std::exception& e) {
        row.ok = false;
        row.note = e.what();
        row.fidelity = 0.0;
        row.fidelity_uncompensated = 0.0;
        row.optimal_time = 0.0;
      }
      table.push_back(row);
    }
  }
  return table;
}

}  // namespace spinmech
