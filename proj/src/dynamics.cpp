#include "spinmech/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "spinmech/errors.hpp"

namespace spinmech {

namespace {

// Hilbert dimension above which dense superoperator work (n^2 storage with
// n = D^2) stops being practical; evolve/correlation switch to stepping.
constexpr int kDenseLimit = 64;

Eigen::Map<const Vector> vec_view(const Matrix& m) {
  return {m.data(), m.size()};
}

Matrix unvec(const Vector& v, int d) {
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

// Model with per-channel A†A cached for the stepper hot path.
struct CompiledModel {
  Matrix h;
  struct Ch {
    Matrix a;
    Matrix ada;
    double rate;
  };
  std::vector<Ch> chans;

  explicit CompiledModel(const LindbladModel& model) : h(model.H.matrix) {
    for (const Channel& c : model.channels) {
      if (c.rate == 0.0) continue;
      chans.push_back({c.op.matrix, c.op.matrix.adjoint() * c.op.matrix,
                       c.rate});
    }
  }

  Matrix rhs(const Matrix& rho) const {
    Matrix out = Complex(0.0, -1.0) * (h * rho - rho * h);
    for (const Ch& c : chans) {
      Matrix arho = c.a * rho;
      out.noalias() += c.rate * (arho * c.a.adjoint());
      out.noalias() -= (0.5 * c.rate) * (c.ada * rho + rho * c.ada);
    }
    return out;
  }
};

void check_state_invariants(const Matrix& rho, double t, double trace_tol,
                            double herm_tol, double eig_floor) {
  const double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (tr_err > trace_tol) {
    std::ostringstream os;
    os << "trace drifted to 1 + " << tr_err << " at t = " << t;
    throw SolverError(os.str());
  }
  const double herm = (rho - rho.adjoint()).norm();
  if (herm > herm_tol * std::max(1.0, rho.norm())) {
    std::ostringstream os;
    os << "Hermiticity violated by " << herm << " at t = " << t;
    throw SolverError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < eig_floor) {
    std::ostringstream os;
    os << "negative population " << min_eig << " at t = " << t;
    throw SolverError(os.str());
  }
}

// Dormand-Prince 5(4) adaptive stepping of m' = rhs(m) from t = 0, invoking
// emit(index, m) at each requested output time. Grid must be ascending.
void dp45_integrate(const CompiledModel& model, Matrix m,
                    const std::vector<double>& out_times, double rel_tol,
                    double abs_tol, long max_steps,
                    const std::function<void(size_t, const Matrix&)>& emit) {
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                      a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                      a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                      a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (out_times.empty()) return;
  const double t_span = out_times.back();
  double t = 0.0;
  size_t next_out = 0;
  while (next_out < out_times.size() && out_times[next_out] <= 0.0)
    emit(next_out++, m);
  if (next_out == out_times.size()) return;

  const double rhs_scale = model.rhs(m).norm();
  double dt = rhs_scale > 0.0
                  ? std::min(t_span, 0.01 * std::max(m.norm(), 1e-30) /
                                         rhs_scale)
                  : t_span;
  const double dt_min = t_span * 1e-14;
  long steps = 0;
  Matrix k1, k2, k3, k4, k5, k6, k7, y5;
  while (next_out < out_times.size()) {
    const double t_target = out_times[next_out];
    const double dt_eff = std::min(dt, t_target - t);
    const bool hits_target = dt_eff >= t_target - t;
    if (++steps > max_steps) {
      std::ostringstream os;
      os << "step budget " << max_steps << " exhausted at t = " << t
         << " (dt = " << dt_eff << ", horizon " << t_span << ")";
      throw SolverError(os.str());
    }
    k1 = model.rhs(m);
    k2 = model.rhs(m + dt_eff * (a21 * k1));
    k3 = model.rhs(m + dt_eff * (a31 * k1 + a32 * k2));
    k4 = model.rhs(m + dt_eff * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = model.rhs(m + dt_eff * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = model.rhs(m + dt_eff * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 +
                                 a65 * k5));
    y5 = m + dt_eff * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = model.rhs(y5);
    const double err_norm =
        dt_eff *
        (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7).norm();
    const double scale = abs_tol + rel_tol * std::max(m.norm(), y5.norm());
    const double err = err_norm / scale;
    const double factor =
        err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
    if (err <= 1.0) {
      t += dt_eff;
      m = y5;
      if (hits_target) emit(next_out++, m);
      // a clipped accepted step must not collapse the step-size hint
      dt = dt_eff < dt ? std::max(dt, dt_eff * factor) : dt * factor;
    } else {
      dt = std::max(dt_eff * factor, dt_min);
      if (dt <= dt_min) {
        std::ostringstream os;
        os << "step size underflow at t = " << t << " (error " << err << ")";
        throw SolverError(os.str());
      }
    }
  }
}

}  // namespace

void LindbladModel::validate() const {
  if (H.matrix.rows() == 0) throw PreconditionError("model has no Hamiltonian");
  if (!H.is_hermitian(1e-10))
    throw InvalidParameterError("Hamiltonian is not Hermitian");
  for (const Channel& c : channels) {
    if (c.op.space != H.space)
      throw DimensionError("jump operator lives on a different space");
    if (!(c.rate >= 0.0))
      throw InvalidParameterError("channel rate must be >= 0");
  }
}

LindbladModel dressed_model(const SystemSpec& spec) {
  spec.validate();
  const HilbertSpace sp = spec.space();
  LindbladModel m;
  m.H = build_qm_dressed(spec);
  const Operator a = lift(sp, 1, fock_destroy(spec.n_fock));
  const DecayRates& r = spec.rates;
  auto add = [&m](const Operator& op, double rate) {
    if (rate > 0.0) m.channels.push_back({op, rate});
  };
  add(a, r.kappa_down);
  add(a.adjoint(), r.kappa_up);
  add(lift(sp, 0, pauli(Axis::minus)), r.gamma_down);
  add(lift(sp, 0, pauli(Axis::plus)), r.gamma_up);
  add(lift(sp, 0, pauli(Axis::z)), r.gamma_phi);
  return m;
}

LindbladModel two_qubit_model(const TwoQubitSpec& spec) {
  spec.validate();
  const HilbertSpace sp = spec.space();
  LindbladModel m;
  m.H = build_qmq_dressed(spec);
  auto add = [&m](const Operator& op, double rate) {
    if (rate > 0.0) m.channels.push_back({op, rate});
  };
  const Operator a = lift(sp, 2, fock_destroy(spec.n_fock));
  add(a, spec.kappa_down);
  add(a.adjoint(), spec.kappa_up);
  for (int k = 0; k < 2; ++k) {
    add(lift(sp, k, pauli(Axis::minus)), spec.qubit[k].gamma_down);
    add(lift(sp, k, pauli(Axis::plus)), spec.qubit[k].gamma_up);
    add(lift(sp, k, pauli(Axis::z)), spec.qubit[k].gamma_phi);
  }
  return m;
}

Matrix lindblad_rhs(const LindbladModel& model, const Matrix& rho) {
  if (rho.rows() != model.H.matrix.rows() ||
      rho.cols() != model.H.matrix.cols())
    throw DimensionError("state dimension does not match the model");
  return CompiledModel(model).rhs(rho);
}

Matrix lindblad_rhs(const LindbladModel& model, const State& state) {
  if (state.space != model.space())
    throw DimensionError("state space does not match the model");
  return lindblad_rhs(model, state.rho);
}

Complex ModeSum::eval(double tau) const {
  Complex out(0.0, 0.0);
  for (int j = 0; j < size(); ++j)
    out += weights(j) * std::exp(rates(j) * tau);
  return out;
}

double ModeSum::slowest_decay() const {
  if (size() == 0) return 0.0;
  double fastest = fastest_scale();
  double slow = std::numeric_limits<double>::infinity();
  for (int j = 0; j < size(); ++j) {
    const double re = std::abs(rates(j).real());
    slow = std::min(slow, re);
  }
  // decay below numerical noise counts as non-decaying
  if (slow < 1e-12 * std::max(fastest, 1.0)) return 0.0;
  return slow;
}

double ModeSum::fastest_scale() const {
  double fast = 0.0;
  for (int j = 0; j < size(); ++j) fast = std::max(fast, std::abs(rates(j)));
  return fast;
}

struct Liouvillian::Impl {
  int d = 0;
  int n = 0;
  Matrix mat;
  bool eig_done = false;
  Vector evals;
  Matrix evecs;
  Eigen::PartialPivLU<Matrix> vlu;

  void ensure_eigen() {
    if (eig_done) return;
    Matrix work = mat;
    evals.resize(n);
    evecs.resize(n, n);
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, evals.data(), nullptr,
        1, evecs.data(), n);
    if (info != 0) {
      std::ostringstream os;
      os << "nonsymmetric eigensolver failed (info " << info << ", n = " << n
         << ")";
      throw SolverError(os.str());
    }
    // spot-check residuals ||L v - s v|| on a spread of columns
    const double fnorm = mat.norm();
    const int samples = std::min(n, 24);
    for (int i = 0; i < samples; ++i) {
      const int j = static_cast<int>(
          (static_cast<long>(i) * (n - 1)) / std::max(1, samples - 1));
      const double resid =
          (mat * evecs.col(j) - evals(j) * evecs.col(j)).norm();
      if (resid > 1e-8 * std::max(fnorm, 1.0)) {
        std::ostringstream os;
        os << "eigenpair residual " << resid << " exceeds tolerance (|L| = "
           << fnorm << ")";
        throw SolverError(os.str());
      }
    }
    vlu.compute(evecs);
    Vector probe = Vector::Ones(n);
    const double recon = (evecs * vlu.solve(probe) - probe).norm() /
                         std::sqrt(static_cast<double>(n));
    if (recon > 1e-6)
      throw SolverError(
          "eigenvector basis is too ill-conditioned for spectral propagation");
    eig_done = true;
  }
};

Liouvillian::Liouvillian(const LindbladModel& model)
    : impl_(std::make_unique<Impl>()) {
  model.validate();
  const int d = model.dim();
  const long n = static_cast<long>(d) * d;
  if (16.0 * n * n > 2.5e9)
    throw SolverError(
        "superoperator would exceed the dense-memory budget; use the "
        "stepping interfaces");
  impl_->d = d;
  impl_->n = static_cast<int>(n);
  const Matrix id = Matrix::Identity(d, d);
  const Matrix& h = model.H.matrix;
  Matrix l = Complex(0.0, -1.0) *
             (Eigen::kroneckerProduct(id, h).eval() -
              Eigen::kroneckerProduct(h.transpose(), id).eval());
  for (const Channel& c : model.channels) {
    if (c.rate == 0.0) continue;
    const Matrix& a = c.op.matrix;
    const Matrix ada = a.adjoint() * a;
    l.noalias() += c.rate * Eigen::kroneckerProduct(a.conjugate(), a).eval();
    l.noalias() -=
        (0.5 * c.rate) *
        (Eigen::kroneckerProduct(id, ada).eval() +
         Eigen::kroneckerProduct(ada.transpose(), id).eval());
  }
  impl_->mat = std::move(l);
}

Liouvillian::~Liouvillian() = default;
Liouvillian::Liouvillian(Liouvillian&&) noexcept = default;
Liouvillian& Liouvillian::operator=(Liouvillian&&) noexcept = default;

int Liouvillian::hilbert_dim() const { return impl_->d; }
int Liouvillian::dim() const { return impl_->n; }
const Matrix& Liouvillian::matrix() const { return impl_->mat; }

const Vector& Liouvillian::eigenvalues() {
  impl_->ensure_eigen();
  return impl_->evals;
}

const Matrix& Liouvillian::eigenvectors() {
  impl_->ensure_eigen();
  return impl_->evecs;
}

Vector Liouvillian::decompose(const Matrix& m) {
  if (m.rows() != impl_->d || m.cols() != impl_->d)
    throw DimensionError("matrix does not match the generator dimension");
  impl_->ensure_eigen();
  return impl_->vlu.solve(Vector(vec_view(m)));
}

Matrix Liouvillian::reconstruct(const Vector& coeffs, double t) {
  if (coeffs.size() != impl_->n)
    throw DimensionError("coefficient vector does not match mode count");
  impl_->ensure_eigen();
  Vector scaled(impl_->n);
  for (int j = 0; j < impl_->n; ++j)
    scaled(j) = coeffs(j) * std::exp(impl_->evals(j) * t);
  return unvec(impl_->evecs * scaled, impl_->d);
}

ModeSum Liouvillian::correlation_modes(const Operator& A,
                                       const Matrix& initial,
                                       double weight_floor) {
  if (A.matrix.rows() != impl_->d || initial.rows() != impl_->d ||
      initial.cols() != impl_->d)
    throw DimensionError("operator does not match the generator dimension");
  impl_->ensure_eigen();
  const Vector u = vec_view(Matrix(A.matrix.adjoint()));
  const Vector left = impl_->evecs.transpose() * u.conjugate();
  const Vector g = impl_->vlu.solve(Vector(vec_view(initial)));
  const Vector c = left.cwiseProduct(g);

  double total = 0.0;
  for (int j = 0; j < impl_->n; ++j) total += std::abs(c(j));
  const double max_abs_s = impl_->evals.cwiseAbs().maxCoeff();
  std::vector<int> keep;
  for (int j = 0; j < impl_->n; ++j) {
    if (std::abs(c(j)) < weight_floor * total) continue;
    if (impl_->evals(j).real() > 1e-6 * std::max(max_abs_s, 1.0)) {
      std::ostringstream os;
      os << "growing mode Re s = " << impl_->evals(j).real()
         << " carries weight " << std::abs(c(j));
      throw SolverError(os.str());
    }
    keep.push_back(j);
  }
  ModeSum out;
  out.rates.resize(keep.size());
  out.weights.resize(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    Complex s = impl_->evals(keep[i]);
    // clamp eigenvalue noise so long windows cannot blow up
    if (s.real() > 0.0) s = Complex(0.0, s.imag());
    out.rates(static_cast<int>(i)) = s;
    out.weights(static_cast<int>(i)) = c(keep[i]);
  }
  return out;
}

Trajectory evolve(const LindbladModel& model, const State& rho0,
                  double t_final, const EvolveOptions& opts) {
  model.validate();
  if (rho0.space != model.space())
    throw DimensionError("initial state space does not match the model");
  if (!(t_final > 0.0)) throw PreconditionError("t_final must be > 0");
  if (opts.grid_points < 2)
    throw InvalidParameterError("grid_points must be >= 2");
  std::string method = opts.method;
  if (method == "auto")
    method = model.dim() <= kDenseLimit ? "propagator" : "stepper";
  if (method != "propagator" && method != "stepper")
    throw InvalidParameterError("unknown evolve method: " + opts.method);
  for (const auto& obs : opts.observables)
    if (obs.second.space != model.space())
      throw DimensionError("observable space does not match the model");

  const int g = opts.grid_points;
  Trajectory traj;
  traj.times.resize(g);
  for (int i = 0; i < g; ++i) traj.times[i] = t_final * i / (g - 1);
  traj.states.reserve(g);
  traj.observable_names.reserve(opts.observables.size());
  for (const auto& obs : opts.observables)
    traj.observable_names.push_back(obs.first);
  traj.observables.assign(opts.observables.size(), {});

  auto record = [&](const Matrix& rho, double t) {
    if (opts.check_invariants)
      check_state_invariants(rho, t, 1e-9, 1e-9, -1e-7);
    traj.states.emplace_back(model.space(), rho);
    for (size_t k = 0; k < opts.observables.size(); ++k)
      traj.observables[k].push_back(
          (opts.observables[k].second.matrix.transpose().cwiseProduct(rho))
              .sum()
              .real());
  };

  if (method == "propagator") {
    Liouvillian lio(model);
    const double dt = t_final / (g - 1);
    const Matrix u = (lio.matrix() * dt).exp();
    Vector v = vec_view(rho0.rho);
    record(rho0.rho, 0.0);
    for (int i = 1; i < g; ++i) {
      v = u * v;
      record(unvec(v, model.dim()), traj.times[i]);
    }
  } else {
    CompiledModel cm(model);
    dp45_integrate(cm, rho0.rho, traj.times, opts.rel_tol, opts.abs_tol,
                   opts.max_steps, [&](size_t i, const Matrix& m) {
                     record(m, traj.times[i]);
                   });
  }
  return traj;
}

State steady_state(const LindbladModel& model) {
  model.validate();
  Liouvillian lio(model);
  const int n = lio.dim();
  const int d = lio.hilbert_dim();

  // uniqueness of the stationary mode
  const Vector& evals = lio.eigenvalues();
  const double max_abs = std::max(evals.cwiseAbs().maxCoeff(), 1.0);
  int nulls = 0;
  for (int j = 0; j < n; ++j)
    if (std::abs(evals(j)) <= 1e-8 * max_abs) ++nulls;
  if (nulls != 1) {
    std::ostringstream os;
    os << "stationary space has dimension " << nulls
       << "; a unique steady state is required";
    throw DegeneracyError(os.str());
  }

  // null vector via the trace-normalization bordered solve
  Matrix m = lio.matrix();
  for (int col = 0; col < n; ++col) m(0, col) = Complex(0.0, 0.0);
  for (int k = 0; k < d; ++k) m(0, k * (d + 1)) = Complex(1.0, 0.0);
  Vector rhs = Vector::Zero(n);
  rhs(0) = Complex(1.0, 0.0);
  Eigen::PartialPivLU<Matrix> lu(m);
  Vector x = lu.solve(rhs);

  auto polish = [&](const Vector& v) {
    Matrix rho = unvec(v, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    return rho;
  };
  Matrix best = polish(x);
  double best_res = lindblad_rhs(model, best).norm();
  for (int pass = 0; pass < 6; ++pass) {
    Vector r = m * x - rhs;
    x -= lu.solve(r);
    Matrix cand = polish(x);
    const double res = lindblad_rhs(model, cand).norm();
    if (res >= best_res) break;
    best = cand;
    best_res = res;
  }
  if (best_res >= 1e-10) {
    std::ostringstream os;
    os << "steady-state residual " << best_res
       << " did not reach the 1e-10 certificate";
    throw SolverError(os.str());
  }
  State out{model.space(), best};
  out.validate(1e-9, 1e-9, -1e-7);
  return out;
}

std::vector<Complex> correlation(const LindbladModel& model, const State& rho0,
                                 const Operator& A, const Operator& B,
                                 const std::vector<double>& tau_grid,
                                 const std::string& method) {
  model.validate();
  if (rho0.space != model.space() || A.space != model.space() ||
      B.space != model.space())
    throw DimensionError("correlation operands live on different spaces");
  if (tau_grid.empty()) throw PreconditionError("empty lag grid");
  for (size_t i = 0; i < tau_grid.size(); ++i) {
    if (tau_grid[i] < 0.0) throw PreconditionError("negative lag");
    if (i > 0 && tau_grid[i] < tau_grid[i - 1])
      throw PreconditionError("lag grid must be ascending");
  }
  std::string mode = method;
  if (mode == "auto") mode = model.dim() <= kDenseLimit ? "eig" : "stepper";
  if (mode != "eig" && mode != "stepper")
    throw InvalidParameterError("unknown correlation method: " + method);

  const Matrix initial = B.matrix * rho0.rho;
  std::vector<Complex> out(tau_grid.size());
  if (mode == "eig") {
    Liouvillian lio(model);
    ModeSum ms = lio.correlation_modes(A, initial);
    for (size_t i = 0; i < tau_grid.size(); ++i) out[i] = ms.eval(tau_grid[i]);
  } else {
    CompiledModel cm(model);
    const Matrix at = A.matrix.transpose();
    dp45_integrate(cm, initial, tau_grid, 1e-9, 1e-13, 20'000'000,
                   [&](size_t i, const Matrix& m) {
                     out[i] = at.cwiseProduct(m).sum();
                   });
  }
  return out;
}

}  // namespace spinmech
