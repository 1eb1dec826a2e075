#pragma once

#include <Eigen/Dense>
#include <complex>

#include "dtc/errors.hpp"

namespace dtc {

// Charge-basis matrices for one transmon mode, Cooper-pair number truncated
// at +-N. Basis index k = n + N, n = -N..N.
//
//   n        = diag(-N..N)
//   cos(phi) : 1/2 on both first off-diagonals
//   sin(phi) : +i/2 on the superdiagonal, -i/2 on the subdiagonal
//
// e^{i phi} raises n by one, so <n+1| sin |n> = -i/2.
struct SingleModeOperators {
  int cutoff = 0;
  Eigen::VectorXd n_diag;
  Eigen::MatrixXcd cos_op;
  Eigen::MatrixXcd sin_op;
};

inline SingleModeOperators build_single_mode_operators(int N) {
  if (N < 1) throw ConfigError("charge cutoff N must be >= 1");
  const int L = 2 * N + 1;
  SingleModeOperators ops;
  ops.cutoff = N;
  ops.n_diag.resize(L);
  for (int k = 0; k < L; ++k) ops.n_diag(k) = static_cast<double>(k - N);
  ops.cos_op = Eigen::MatrixXcd::Zero(L, L);
  ops.sin_op = Eigen::MatrixXcd::Zero(L, L);
  const std::complex<double> ihalf(0.0, 0.5);
  for (int k = 0; k + 1 < L; ++k) {
    ops.cos_op(k, k + 1) = 0.5;
    ops.cos_op(k + 1, k) = 0.5;
    ops.sin_op(k, k + 1) = ihalf;
    ops.sin_op(k + 1, k) = -ihalf;
  }
  return ops;
}

// 4 W_ii n^2 - omega_J cos(phi): real symmetric in the charge basis.
inline Eigen::MatrixXd single_mode_transmon_hamiltonian(double W_ii, double omega_J, int N) {
  const int L = 2 * N + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
  for (int k = 0; k < L; ++k) {
    const double n = k - N;
    h(k, k) = 4.0 * W_ii * n * n;
  }
  for (int k = 0; k + 1 < L; ++k) {
    h(k, k + 1) = -0.5 * omega_J;
    h(k + 1, k) = -0.5 * omega_J;
  }
  return h;
}

}  // namespace dtc
