#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "spinmech/errors.hpp"

namespace spinmech {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Ordered list of subsystem dimensions. Composite indices are row-major in
// this order: the first subsystem varies slowest. Convention used throughout:
// [qubit(s)..., ancilla(s)..., oscillator].
struct HilbertSpace {
  std::vector<int> dims;

  HilbertSpace() = default;
  HilbertSpace(std::initializer_list<int> d) : dims(d) { check(); }
  explicit HilbertSpace(std::vector<int> d) : dims(std::move(d)) { check(); }

  int dim() const;
  int subsystems() const { return static_cast<int>(dims.size()); }
  bool operator==(const HilbertSpace& o) const { return dims == o.dims; }
  bool operator!=(const HilbertSpace& o) const { return !(*this == o); }

 private:
  void check() const;
};

// A square matrix tied to the space it acts on.
struct Operator {
  HilbertSpace space;
  Matrix matrix;

  Operator() = default;
  Operator(HilbertSpace s, Matrix m);

  int dim() const { return static_cast<int>(matrix.rows()); }
  Operator adjoint() const { return {space, matrix.adjoint()}; }
  bool is_hermitian(double rel_tol = 1e-12) const;
};

Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(Complex c, const Operator& a);
Operator operator*(double c, const Operator& a);

// Density matrix tied to its space.
struct State {
  HilbertSpace space;
  Matrix rho;

  State() = default;
  State(HilbertSpace s, Matrix r);

  int dim() const { return static_cast<int>(rho.rows()); }
  // Throws IntegrityError if trace/Hermiticity/positivity are violated.
  void validate(double trace_tol = 1e-9, double herm_tol = 1e-12,
                double eig_floor = -1e-9) const;
};

// Annihilation operator on a Fock space truncated to n_trunc levels.
// [a, a†] = I except the top-corner entry, which is -(n_trunc-1).
Operator fock_destroy(int n_trunc);

enum class Axis { x, y, z, plus, minus };

// 2x2 Pauli / ladder matrix; basis index 0 is the sigma_z = +1 state.
Operator pauli(Axis axis);

Operator identity(const HilbertSpace& space);

// Kronecker product in list order; dims concatenate.
Operator tensor(const std::vector<Operator>& ops);

// Embeds a single-subsystem operator at the given slot of a composite space.
Operator lift(const HilbertSpace& space, int slot, const Operator& local);

// Partial trace keeping the listed subsystems (original relative order).
Matrix partial_trace(const HilbertSpace& space, const Matrix& m,
                     const std::vector<int>& keep);
State partial_trace(const State& state, const std::vector<int>& keep);

// Bose-Einstein diagonal state, renormalized over the truncated space.
State thermal_state(int n_trunc, double n_th);

// trace(op * rho); real to ~1e-12 for Hermitian op.
Complex expect(const Operator& op, const State& state);

}  // namespace spinmech
