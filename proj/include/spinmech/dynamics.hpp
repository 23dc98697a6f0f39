#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spinmech/hilbert.hpp"
#include "spinmech/models.hpp"

namespace spinmech {

// One jump operator with its rate [Hz].
struct Channel {
  Operator op;
  double rate = 0.0;
};

// Generator data of the master equation
//   d rho/dt = -i[H, rho] + sum_k rate_k (A rho A† - {A†A, rho}/2).
struct LindbladModel {
  Operator H;
  std::vector<Channel> channels;

  void validate() const;  // shared space, nonnegative rates
  const HilbertSpace& space() const { return H.space; }
  int dim() const { return H.dim(); }
};

// Assembled one-qubit model: rotating-frame Hamiltonian plus the jump set
// {a, a†, s-, s+, sz} with the configured rates, zero-rate channels omitted.
LindbladModel dressed_model(const SystemSpec& spec);

// Two qubits sharing the mode: per-qubit {s-, s+, sz} plus oscillator {a, a†}.
LindbladModel two_qubit_model(const TwoQubitSpec& spec);

// Right-hand side of the master equation for a density-matrix-shaped input
// (need not be Hermitian; correlation propagation uses non-Hermitian inputs).
Matrix lindblad_rhs(const LindbladModel& model, const Matrix& rho);
Matrix lindblad_rhs(const LindbladModel& model, const State& state);

// Time grid, states, and named real expectation series.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> observables;  // [observable][time index]
};

struct EvolveOptions {
  int grid_points = 201;        // output points including t = 0
  std::string method = "auto";  // auto | propagator | stepper
  double rel_tol = 1e-9;        // stepper local error control
  double abs_tol = 1e-13;
  long max_steps = 20'000'000;  // stepper budget before solver error
  bool check_invariants = true;  // trace/Hermiticity/positivity per point
  std::vector<std::pair<std::string, Operator>> observables;
};

// Propagates rho0 to t_final on a uniform grid. Dimension <= 64 defaults to
// a precomputed matrix-exponential propagator reused across steps; larger
// systems use adaptive embedded Runge-Kutta stepping on the density matrix.
Trajectory evolve(const LindbladModel& model, const State& rho0,
                  double t_final, const EvolveOptions& opts = {});

// Unique stationary state; degenerate or missing null space raises
// DegeneracyError, an unconverged residual raises SolverError.
State steady_state(const LindbladModel& model);

// Exponential-mode representation of a scalar time series
// f(tau) = sum_j weight_j exp(rate_j tau).
struct ModeSum {
  Vector rates;
  Vector weights;

  Complex eval(double tau) const;
  int size() const { return static_cast<int>(rates.size()); }
  // Smallest |Re rate| over retained modes (slowest decay), 0 if empty.
  double slowest_decay() const;
  // Largest |rate| over retained modes (fastest time scale), 0 if empty.
  double fastest_scale() const;
};

// Dense superoperator form of a LindbladModel with a lazily computed
// spectral decomposition (nonsymmetric eigenproblem via LAPACK).
class Liouvillian {
 public:
  explicit Liouvillian(const LindbladModel& model);
  ~Liouvillian();
  Liouvillian(Liouvillian&&) noexcept;
  Liouvillian& operator=(Liouvillian&&) noexcept;

  int hilbert_dim() const;
  int dim() const;  // hilbert_dim squared
  const Matrix& matrix() const;

  // Spectral pieces; first call triggers the decomposition and a residual
  // check (SolverError on failure).
  const Vector& eigenvalues();
  const Matrix& eigenvectors();
  // Coefficients of vec(m) in the eigenbasis (V^{-1} vec(m)).
  Vector decompose(const Matrix& m);
  // Density-shaped matrix at time t from eigenbasis coefficients.
  Matrix reconstruct(const Vector& coeffs, double t);

  // Modes of tau -> trace(A · e^{L tau}[initial]); weights below
  // weight_floor (relative to the total weight) are pruned.
  ModeSum correlation_modes(const Operator& A, const Matrix& initial,
                            double weight_floor = 1e-12);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Two-time average <A(tau) B(0)> on the given lag grid: the quantum
// regression recipe evolving B·rho0 under the model's generator. Spectral
// route for dimension <= 64, stepper otherwise; "eig" / "stepper" force one.
std::vector<Complex> correlation(const LindbladModel& model, const State& rho0,
                                 const Operator& A, const Operator& B,
                                 const std::vector<double>& tau_grid,
                                 const std::string& method = "auto");

}  // namespace spinmech
