#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <sstream>

#include "dtc/hamiltonian.hpp"
#include "dtc/pulse.hpp"

namespace dtc {

struct PropagationSettings {
  double dt = 2e-3 * units::nanosecond;  // initial step
  int krylov_max = 30;
  double krylov_tol = 1e-12;   // per-step Krylov truncation tolerance
  bool include_drive_term = true;
  double norm_tol = 1e-6;      // allowed drift of ||psi||
  bool certify = false;        // dt-halving certificate on this propagation
  double certificate_tol = 1e-7;
  int max_halvings = 6;
  int cutoff = 10;             // charge cutoff N for gate runs
};

namespace detail {

// psi <- exp(-i dt H) psi via a Lanczos Krylov space. The tridiagonal
// coefficients are real for Hermitian H; the small exponential is evaluated
// by eigendecomposition. The three-term recurrence runs without extra
// reorthogonalization: the spaces here stay small (m <= 30) and the global
// dt-halving certificate bounds any accumulated drift. Converged when the
// weight leaking past the last basis vector is negligible.
template <class Op>
void krylov_exp_step(const Op& h, Eigen::VectorXcd& psi, double dt, int m_max, double tol,
                     Eigen::MatrixXcd& V, Eigen::VectorXcd& w) {
  using Cplx = std::complex<double>;
  const double nrm = psi.norm();
  if (nrm == 0.0) return;
  const Eigen::Index dim = psi.size();
  if (V.rows() != dim || V.cols() < m_max) V.resize(dim, m_max);
  std::vector<double> alpha, beta;
  alpha.reserve(m_max);
  beta.reserve(m_max);
  V.col(0) = psi / nrm;
  int m = 0;
  auto small_exp_coef = [&](int n) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < n) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    Eigen::VectorXcd c(n);
    for (int i = 0; i < n; ++i) c(i) = std::exp(Cplx(0.0, -dt * es.eigenvalues()(i)));
    return Eigen::VectorXcd(es.eigenvectors().cast<Cplx>() *
                            c.cwiseProduct(es.eigenvectors().row(0).transpose().cast<Cplx>()));
  };
  for (int j = 0; j < m_max; ++j) {
    h.apply(V.col(j), w);
    if (j > 0) w.noalias() -= beta[j - 1] * V.col(j - 1);
    const double a = std::real(Cplx(V.col(j).dot(w)));
    w.noalias() -= a * V.col(j);
    alpha.push_back(a);
    m = j + 1;
    const double b = w.norm();
    if (b < 1e-13 || m == m_max) break;
    if (j >= 2) {
      const Eigen::VectorXcd coef = small_exp_coef(m);
      if (dt * b * std::abs(coef(m - 1)) < tol) break;
    }
    beta.push_back(b);
    V.col(j + 1) = w / b;
  }
  psi.noalias() = V.leftCols(m) * (nrm * small_exp_coef(m));
}

}  // namespace detail

// Time-ordered propagation under the schedule's flux trajectory with
// piecewise-constant H per step, sampled at the step midpoint.
inline StateVector propagate_once(const HamiltonianFamily& family, const StateVector& psi0,
                                  const PulseSchedule& schedule, const PropagationSettings& st,
                                  double dt) {
  if (psi0.size() != family.dim()) throw DimensionError("propagate: dimension mismatch");
  StateVector psi = psi0;
  const double T = schedule.T_g;
  if (T <= 0.0) return psi;
  const long nsteps = std::max<long>(1, std::lround(T / dt));
  const double h = T / static_cast<double>(nsteps);
  Eigen::MatrixXcd V;
  Eigen::VectorXcd w(psi.size());
  const double norm0 = psi.norm();
  for (long i = 0; i < nsteps; ++i) {
    const double tm = (static_cast<double>(i) + 0.5) * h;
    const double th = schedule.theta_at(tm);
    const double thd = st.include_drive_term ? schedule.theta_dot_at(tm) : 0.0;
    const HamiltonianAction act = family.at(th, thd);
    detail::krylov_exp_step(act, psi, h, st.krylov_max, st.krylov_tol, V, w);
    if ((i & 255) == 0 && std::abs(psi.norm() - norm0) > st.norm_tol) {
      std::ostringstream os;
      os << "propagate: norm drift " << std::abs(psi.norm() - norm0) << " at t=" << tm;
      throw ConvergenceError(os.str());
    }
  }
  if (std::abs(psi.norm() - norm0) > st.norm_tol)
    throw ConvergenceError("propagate: final norm drift exceeds tolerance");
  return psi;
}

// Propagate with an optional dt-halving certificate: halve until the final
// state moves by less than certificate_tol.
inline StateVector propagate(const HamiltonianFamily& family, const StateVector& psi0,
                             const PulseSchedule& schedule, const PropagationSettings& st) {
  double dt = st.dt;
  StateVector psi = propagate_once(family, psi0, schedule, st, dt);
  if (!st.certify || schedule.T_g <= 0.0) return psi;
  for (int h = 0; h < st.max_halvings; ++h) {
    const StateVector finer = propagate_once(family, psi0, schedule, st, 0.5 * dt);
    if ((finer - psi).norm() < st.certificate_tol) return finer;
    dt *= 0.5;
    psi = finer;
  }
  throw ConvergenceError("propagate: dt-halving certificate did not converge");
}

}  // namespace dtc
