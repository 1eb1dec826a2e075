#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "dtc/constants.hpp"
#include "dtc/errors.hpp"

namespace dtc {

// Design values of the four-transmon circuit: shunt and coupling capacitances
// plus target transmon frequencies. Mode order: qubit 1, qubit 2, coupler
// transmon 3, coupler transmon 4. The loop junction (index 5) connects
// transmons 3 and 4; its Josephson frequency follows the j5_ratio rule.
struct CircuitParams {
  // cap(i,j), fF; diagonal entries are shunts, off-diagonal entries couplings.
  Eigen::Matrix4d cap_fF = Eigen::Matrix4d::Zero();
  // target angular frequencies, rad/s
  Eigen::Vector4d omega_design = Eigen::Vector4d::Zero();
  // omega_J5 = j5_ratio * (omega_J3 + omega_J4) / 2
  double j5_ratio = 0.25;

  void set_cap(int i, int j, double fF) {
    cap_fF(i, j) = fF;
    cap_fF(j, i) = fF;
  }

  void validate() const {
    for (int i = 0; i < 4; ++i) {
      if (!(cap_fF(i, i) > 0.0)) throw ConfigError("shunt capacitance must be positive");
      if (!(omega_design(i) > 0.0)) throw ConfigError("design frequency must be positive");
      for (int j = i + 1; j < 4; ++j) {
        if (cap_fF(i, j) < 0.0) throw ConfigError("coupling capacitance must be >= 0");
        if (cap_fF(i, j) != cap_fF(j, i)) throw ConfigError("capacitance matrix not symmetric");
      }
    }
    if (omega_design(0) == omega_design(1))
      throw ConfigError("qubits must be detuned: omega1 != omega2");
    // j5_ratio = 0 disables the loop junction (decoupled-limit studies)
    if (!(j5_ratio >= 0.0)) throw ConfigError("j5_ratio must be >= 0");
  }

  // Reference design used throughout the docs and the regression suite.
  static CircuitParams reference_design() {
    CircuitParams p;
    for (int i = 0; i < 4; ++i) p.cap_fF(i, i) = 60.0;
    p.set_cap(0, 1, 0.025);
    p.set_cap(0, 2, 6.0);
    p.set_cap(0, 3, 0.05);
    p.set_cap(1, 2, 0.05);
    p.set_cap(1, 3, 6.0);
    p.set_cap(2, 3, 1.0);
    p.omega_design << units::ghz_to_rad(5.0), units::ghz_to_rad(5.7),
        units::ghz_to_rad(7.2), units::ghz_to_rad(8.5);
    return p;
  }
};

struct DerivedParams {
  Eigen::Matrix4d M_fF;        // capacitance matrix, fF
  Eigen::Vector4d q_coeff_fF;  // q = q_coeff * dPhi_ex/dt, fF
  Eigen::Matrix4d W;           // charging-frequency matrix, rad/s
  double omega_C34 = 0.0;      // drive normalization, rad/s
  std::array<double, 5> omega_J{};  // rad/s
  std::array<double, 5> I_c{};      // A
  Eigen::Matrix4d g;                // bosonic coupling rates, rad/s
  Eigen::Vector4d omega_design;     // rad/s (copied from input)

  double anharmonicity(int i) const { return W(i, i); }
};

// Kinetic-energy expansion under the loop constraint: the loop junction's
// flux variable is eliminated, which adds C34 to rows/columns 3,4 and
// produces the flux-rate charge offset q (nonzero only on modes 3,4).
inline void assemble_capacitance_matrix(const CircuitParams& p, Eigen::Matrix4d& M_fF,
                                        Eigen::Vector4d& q_coeff_fF) {
  p.validate();
  M_fF.setZero();
  for (int i = 0; i < 4; ++i) M_fF(i, i) = p.cap_fF(i, i);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      M_fF(i, i) += p.cap_fF(i, j);
      M_fF(j, j) += p.cap_fF(i, j);
      M_fF(i, j) = -p.cap_fF(i, j);
      M_fF(j, i) = -p.cap_fF(i, j);
    }
  const double c34 = p.cap_fF(2, 3);
  q_coeff_fF << 0.0, 0.0, -c34, c34;

  Eigen::LLT<Eigen::Matrix4d> llt(M_fF);
  if (llt.info() != Eigen::Success)
    throw ConfigError("capacitance matrix is not positive definite");
}

inline void derive_charging_matrix(const Eigen::Matrix4d& M_fF, Eigen::Matrix4d& W,
                                   double& omega_C34) {
  Eigen::LLT<Eigen::Matrix4d> llt(M_fF);
  if (llt.info() != Eigen::Success)
    throw ConfigError("capacitance matrix is singular or not positive definite");
  const Eigen::Matrix4d Minv_fF = llt.solve(Eigen::Matrix4d::Identity());
  W = (constants::charging_rate / units::femto_farad) * Minv_fF;
  // C34 = 0 has no flux drive; the infinite normalization zeroes the term
  const double c34 = -M_fF(2, 3);
  omega_C34 = c34 > 0.0 ? constants::charging_rate / (c34 * units::femto_farad)
                        : std::numeric_limits<double>::infinity();
}

inline void derive_josephson_parameters(const Eigen::Vector4d& omega_design,
                                        const Eigen::Matrix4d& W, double j5_ratio,
                                        std::array<double, 5>& omega_J,
                                        std::array<double, 5>& I_c) {
  for (int i = 0; i < 4; ++i) {
    const double wp = omega_design(i) + W(i, i);  // plasma frequency
    if (!(wp > 0.0)) throw ConfigError("omega_i + W_ii must be positive");
    omega_J[i] = wp * wp / (8.0 * W(i, i));
  }
  omega_J[4] = j5_ratio * 0.5 * (omega_J[2] + omega_J[3]);
  for (int i = 0; i < 5; ++i)
    I_c[i] = constants::hbar * omega_J[i] / constants::reduced_flux_quantum;
}

inline Eigen::Matrix4d bosonic_coupling_rates(const Eigen::Vector4d& omega_design,
                                              const Eigen::Matrix4d& W) {
  Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      g(i, j) = 0.5 * W(i, j) *
                std::sqrt((omega_design(i) + W(i, i)) * (omega_design(j) + W(j, j)) /
                          (W(i, i) * W(j, j)));
    }
  return g;
}

inline DerivedParams derive_all(const CircuitParams& p) {
  DerivedParams d;
  assemble_capacitance_matrix(p, d.M_fF, d.q_coeff_fF);
  derive_charging_matrix(d.M_fF, d.W, d.omega_C34);
  derive_josephson_parameters(p.omega_design, d.W, p.j5_ratio, d.omega_J, d.I_c);
  d.g = bosonic_coupling_rates(p.omega_design, d.W);
  d.omega_design = p.omega_design;
  return d;
}

struct ClassicalCouplerReport {
  double phi3_0 = 0.0;           // rad
  double phi4_0 = 0.0;           // rad
  Eigen::Matrix2d quad_form;     // rad/s, second-order expansion around the minimum
  double theta_ex_0 = 0.0;       // rad, decoupling flux
};

namespace detail {

// Minimize V(p3,p4) = -wj3 cos p3 - wj4 cos p4 - wj5 cos(p4-p3-theta)
// by damped Newton from (0,0). The transmon regime keeps the Hessian positive
// definite near the minimum.
inline void minimize_coupler_potential(double wj3, double wj4, double wj5, double theta,
                                       double& p3, double& p4) {
  p3 = 0.0;
  p4 = 0.0;
  const double gtol = 1e-12 * wj5;
  auto grad_norm = [&](double a, double b) {
    const double su = std::sin(b - a - theta);
    const double g1 = wj3 * std::sin(a) - wj5 * su;
    const double g2 = wj4 * std::sin(b) + wj5 * su;
    return std::sqrt(g1 * g1 + g2 * g2);
  };
  for (int it = 0; it < 200; ++it) {
    const double su = std::sin(p4 - p3 - theta);
    const double cu = std::cos(p4 - p3 - theta);
    const double g1 = wj3 * std::sin(p3) - wj5 * su;
    const double g2 = wj4 * std::sin(p4) + wj5 * su;
    if (std::sqrt(g1 * g1 + g2 * g2) < gtol) return;
    const double h11 = wj3 * std::cos(p3) + wj5 * cu;
    const double h22 = wj4 * std::cos(p4) + wj5 * cu;
    const double h12 = -wj5 * cu;
    const double det = h11 * h22 - h12 * h12;
    double d3, d4;
    if (std::abs(det) > 1e-30) {
      d3 = -(h22 * g1 - h12 * g2) / det;
      d4 = -(-h12 * g1 + h11 * g2) / det;
    } else {  // fall back to gradient descent
      d3 = -g1 / (wj3 + wj5);
      d4 = -g2 / (wj4 + wj5);
    }
    double step = 1.0;
    const double g0 = grad_norm(p3, p4);
    for (int ls = 0; ls < 40; ++ls) {
      if (grad_norm(p3 + step * d3, p4 + step * d4) < g0) break;
      step *= 0.5;
    }
    p3 += step * d3;
    p4 += step * d4;
  }
  if (grad_norm(p3, p4) >= gtol) {
    std::ostringstream os;
    os << "coupler potential minimization did not converge; last iterate (" << p3 << ", "
       << p4 << ")";
    throw ConvergenceError(os.str());
  }
}

}  // namespace detail

inline ClassicalCouplerReport classical_coupler_analysis(double omega_J3, double omega_J4,
                                                         double omega_J5, double theta_ex) {
  if (!(omega_J3 > 0.0 && omega_J4 > 0.0 && omega_J5 > 0.0))
    throw ConfigError("classical_coupler_analysis: omega_J values must be positive");
  ClassicalCouplerReport r;

  auto offdiag_at = [&](double theta, double& p3, double& p4) {
    detail::minimize_coupler_potential(omega_J3, omega_J4, omega_J5, theta, p3, p4);
    return -omega_J5 * std::cos(p4 - p3 - theta);
  };

  double p3, p4;
  const double od = offdiag_at(theta_ex, p3, p4);
  r.phi3_0 = p3;
  r.phi4_0 = p4;
  const double cu = std::cos(p4 - p3 - theta_ex);
  r.quad_form << omega_J3 * std::cos(p3) + omega_J5 * cu, -omega_J5 * cu, -omega_J5 * cu,
      omega_J4 * std::cos(p4) + omega_J5 * cu;
  (void)od;

  // The off-diagonal element changes sign exactly once on (0, pi); locate the
  // decoupling flux by bisection with the minimizer re-run at every probe.
  double lo = 0.0, hi = M_PI;
  double flo = offdiag_at(lo, p3, p4);
  double fhi = offdiag_at(hi, p3, p4);
  if (flo * fhi > 0.0) throw ConvergenceError("no decoupling flux bracket on [0, pi]");
  for (int it = 0; it < 200 && (hi - lo) > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = offdiag_at(mid, p3, p4);
    if (flo * fm <= 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  r.theta_ex_0 = 0.5 * (lo + hi);
  return r;
}

}  // namespace dtc
