#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical kernels.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
using Eigen::MatrixXcd;

/// Truncated annihilation operator built from its matrix elements.
inline MatrixXcd lowering(int N) {
  MatrixXcd a = MatrixXcd::Zero(N, N);
  for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// exp(M) by scaling and squaring around a long Taylor series.
inline MatrixXcd expm(const MatrixXcd& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
  const MatrixXcd scaled = m / std::ldexp(1.0, squarings);
  MatrixXcd sum = MatrixXcd::Identity(m.rows(), m.cols());
  MatrixXcd term = sum;
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// exp(alpha a^dagger - conj(alpha) a) of the truncated generator.
inline MatrixXcd displacement(cd alpha, int N) {
  const MatrixXcd a = lowering(N);
  const MatrixXcd gen = alpha * a.adjoint() - std::conj(alpha) * a;
  return expm(gen);
}

/// Two-mode operator with mode 0 varying fastest in the basis index.
inline MatrixXcd two_mode(const MatrixXcd& mode0, const MatrixXcd& mode1) {
  const Eigen::Index n0 = mode0.rows();
  const Eigen::Index n1 = mode1.rows();
  MatrixXcd out = MatrixXcd::Zero(n0 * n1, n0 * n1);
  for (Eigen::Index i1 = 0; i1 < n1; ++i1)
    for (Eigen::Index j1 = 0; j1 < n1; ++j1)
      if (mode1(i1, j1) != cd{0.0, 0.0}) out.block(i1 * n0, j1 * n0, n0, n0) = mode1(i1, j1) * mode0;
  return out;
}

inline MatrixXcd hermitian_real(const MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }
inline MatrixXcd hermitian_imag(const MatrixXcd& a) { return (a - a.adjoint()) / cd{0.0, 2.0}; }

/// Random normalised vector supported on levels < support in each of two modes.
inline Eigen::VectorXcd low_fock_vector(int N, int support, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(N) * N);
  for (int n1 = 0; n1 < support; ++n1)
    for (int n0 = 0; n0 < support; ++n0) v(n0 + N * n1) = cd{g(rng), g(rng)};
  return v.normalized();
}

inline double max_abs(const MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
