#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

#include "spinmech/hilbert.hpp"

namespace test_support {

inline Eigen::MatrixXcd random_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = std::complex<double>(g(rng), g(rng));
  return m;
}

inline Eigen::MatrixXcd random_hermitian(int n, std::mt19937& rng) {
  Eigen::MatrixXcd m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

inline Eigen::MatrixXcd random_density(int n, std::mt19937& rng) {
  Eigen::MatrixXcd g = random_matrix(n, rng);
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  return rho;
}

inline Eigen::VectorXcd random_pure(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::complex<double>(g(rng), g(rng));
  v.normalize();
  return v;
}

}  // namespace test_support
