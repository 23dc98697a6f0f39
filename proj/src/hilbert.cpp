#include "spinmech/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numeric>
#include <string>

namespace spinmech {

int HilbertSpace::dim() const {
  int d = 1;
  for (int k : dims) d *= k;
  return d;
}

void HilbertSpace::check() const {
  if (dims.empty()) throw DimensionError("HilbertSpace: empty dimension list");
  for (int k : dims)
    if (k < 2)
      throw DimensionError("HilbertSpace: subsystem dimension " +
                           std::to_string(k) + " < 2");
}

Operator::Operator(HilbertSpace s, Matrix m) : space(std::move(s)), matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols() || matrix.rows() != space.dim())
    throw DimensionError("Operator: matrix side does not match space dimension");
}

bool Operator::is_hermitian(double rel_tol) const {
  double scale = matrix.norm();
  if (scale == 0.0) return true;
  return (matrix - matrix.adjoint()).norm() <= rel_tol * scale;
}

namespace {
void require_same_space(const HilbertSpace& a, const HilbertSpace& b,
                        const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": operand spaces differ");
}
}  // namespace

Operator operator+(const Operator& a, const Operator& b) {
  require_same_space(a.space, b.space, "operator+");
  return {a.space, a.matrix + b.matrix};
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_space(a.space, b.space, "operator-");
  return {a.space, a.matrix - b.matrix};
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_space(a.space, b.space, "operator*");
  return {a.space, a.matrix * b.matrix};
}

Operator operator*(Complex c, const Operator& a) { return {a.space, c * a.matrix}; }
Operator operator*(double c, const Operator& a) { return {a.space, c * a.matrix}; }

State::State(HilbertSpace s, Matrix r) : space(std::move(s)), rho(std::move(r)) {
  if (rho.rows() != rho.cols() || rho.rows() != space.dim())
    throw DimensionError("State: matrix side does not match space dimension");
}

void State::validate(double trace_tol, double herm_tol, double eig_floor) const {
  double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (tr_err > trace_tol)
    throw IntegrityError("State: |trace - 1| = " + std::to_string(tr_err));
  double scale = std::max(1.0, rho.norm());
  if ((rho - rho.adjoint()).norm() > herm_tol * scale)
    throw IntegrityError("State: density matrix not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < eig_floor)
    throw IntegrityError("State: negative eigenvalue " + std::to_string(min_eig));
}

Operator fock_destroy(int n_trunc) {
  if (n_trunc < 2)
    throw InvalidParameterError("fock_destroy: n_trunc must be >= 2");
  Matrix a = Matrix::Zero(n_trunc, n_trunc);
  for (int n = 1; n < n_trunc; ++n) a(n - 1, n) = std::sqrt(double(n));
  return {HilbertSpace{n_trunc}, a};
}

Operator pauli(Axis axis) {
  Matrix m = Matrix::Zero(2, 2);
  const Complex i(0.0, 1.0);
  switch (axis) {
    case Axis::x: m << 0, 1, 1, 0; break;
    case Axis::y: m << 0, -i, i, 0; break;
    case Axis::z: m << 1, 0, 0, -1; break;
    case Axis::plus: m << 0, 1, 0, 0; break;
    case Axis::minus: m << 0, 0, 1, 0; break;
  }
  return {HilbertSpace{2}, m};
}

Operator identity(const HilbertSpace& space) {
  return {space, Matrix::Identity(space.dim(), space.dim())};
}

Operator tensor(const std::vector<Operator>& ops) {
  if (ops.empty()) throw PreconditionError("tensor: empty operator list");
  Matrix acc = ops.front().matrix;
  std::vector<int> dims = ops.front().space.dims;
  for (size_t k = 1; k < ops.size(); ++k) {
    acc = Eigen::kroneckerProduct(acc, ops[k].matrix).eval();
    dims.insert(dims.end(), ops[k].space.dims.begin(), ops[k].space.dims.end());
  }
  return {HilbertSpace(dims), acc};
}

Operator lift(const HilbertSpace& space, int slot, const Operator& local) {
  if (slot < 0 || slot >= space.subsystems())
    throw DimensionError("lift: subsystem index out of range");
  if (local.dim() != space.dims[slot])
    throw DimensionError("lift: local operator does not fit target subsystem");
  std::vector<Operator> factors;
  factors.reserve(space.dims.size());
  for (int k = 0; k < space.subsystems(); ++k) {
    if (k == slot)
      factors.push_back(local);
    else
      factors.push_back(identity(HilbertSpace{space.dims[k]}));
  }
  return tensor(factors);
}

Matrix partial_trace(const HilbertSpace& space, const Matrix& m,
                     const std::vector<int>& keep) {
  const int ns = space.subsystems();
  if (keep.empty()) throw PreconditionError("partial_trace: empty keep set");
  std::vector<bool> keep_mask(ns, false);
  for (int k : keep) {
    if (k < 0 || k >= ns)
      throw DimensionError("partial_trace: subsystem index out of range");
    if (keep_mask[k])
      throw DimensionError("partial_trace: repeated subsystem index");
    keep_mask[k] = true;
  }
  if (m.rows() != space.dim() || m.cols() != space.dim())
    throw DimensionError("partial_trace: matrix does not match space");

  // Row-major strides over the composite index.
  std::vector<int> stride(ns, 1);
  for (int k = ns - 2; k >= 0; --k) stride[k] = stride[k + 1] * space.dims[k + 1];

  int dim_keep = 1;
  std::vector<int> keep_order;  // original relative order
  for (int k = 0; k < ns; ++k)
    if (keep_mask[k]) {
      keep_order.push_back(k);
      dim_keep *= space.dims[k];
    }
  std::vector<int> kstride(keep_order.size(), 1);
  for (int k = static_cast<int>(keep_order.size()) - 2; k >= 0; --k)
    kstride[k] = kstride[k + 1] * space.dims[keep_order[k + 1]];

  const int D = space.dim();
  std::vector<int> digits(ns);
  auto decompose = [&](int idx, std::vector<int>& out) {
    for (int k = 0; k < ns; ++k) {
      out[k] = idx / stride[k];
      idx -= out[k] * stride[k];
    }
  };
  auto keep_index = [&](const std::vector<int>& d) {
    int idx = 0;
    for (size_t k = 0; k < keep_order.size(); ++k)
      idx += d[keep_order[k]] * kstride[k];
    return idx;
  };

  Matrix out = Matrix::Zero(dim_keep, dim_keep);
  std::vector<int> dr(ns), dc(ns);
  for (int r = 0; r < D; ++r) {
    decompose(r, dr);
    for (int c = 0; c < D; ++c) {
      decompose(c, dc);
      bool diagonal_on_traced = true;
      for (int k = 0; k < ns; ++k)
        if (!keep_mask[k] && dr[k] != dc[k]) {
          diagonal_on_traced = false;
          break;
        }
      if (diagonal_on_traced) out(keep_index(dr), keep_index(dc)) += m(r, c);
    }
  }
  return out;
}

State partial_trace(const State& state, const std::vector<int>& keep) {
  Matrix reduced = partial_trace(state.space, state.rho, keep);
  std::vector<int> dims;
  std::vector<bool> keep_mask(state.space.subsystems(), false);
  for (int k : keep) keep_mask[k] = true;
  for (int k = 0; k < state.space.subsystems(); ++k)
    if (keep_mask[k]) dims.push_back(state.space.dims[k]);
  return {HilbertSpace(dims), std::move(reduced)};
}

State thermal_state(int n_trunc, double n_th) {
  if (n_trunc < 2)
    throw InvalidParameterError("thermal_state: n_trunc must be >= 2");
  if (n_th < 0.0)
    throw InvalidParameterError("thermal_state: n_th must be >= 0");
  Matrix rho = Matrix::Zero(n_trunc, n_trunc);
  const double r = n_th / (n_th + 1.0);
  double norm = 0.0;
  double p = 1.0;
  for (int n = 0; n < n_trunc; ++n) {
    rho(n, n) = p;
    norm += p;
    p *= r;
  }
  rho /= norm;
  return {HilbertSpace{n_trunc}, rho};
}

Complex expect(const Operator& op, const State& state) {
  if (op.space != state.space)
    throw DimensionError("expect: operator and state spaces differ");
  return (op.matrix.transpose().cwiseProduct(state.rho)).sum();
}

}  // namespace spinmech
