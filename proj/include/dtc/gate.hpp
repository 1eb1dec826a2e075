#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <future>
#include <vector>

#include "dtc/propagator.hpp"
#include "dtc/spectrum.hpp"

namespace dtc {

// Projected gate of one flux pulse. Input/row order |00>, |01>, |10>, |11>
// (U'_{2i+j, 2i'+j'} = <psi_ij | psi'_{i'j'}>); the qubit basis states are the
// labeled idle-point eigenstates. U' is not unitary when leakage is present:
// tr(U'^dag U') = 4 - sum(leakage).
struct GateResult {
  double T_g = 0.0;
  Eigen::Matrix4cd U_prime = Eigen::Matrix4cd::Zero();
  Eigen::Matrix4cd U_id = Eigen::Matrix4cd::Identity();
  double theta_cphase = 0.0;   // rad, wrapped to (-pi, pi]
  double avg_fidelity = 0.0;
  std::array<double, 4> leakage{};  // per input

  struct Channel {
    Label label;
    double p = 0.0;
  };
  std::array<std::vector<Channel>, 4> channels;  // non-qubit labeled states
  std::array<double, 4> channel_remainder{};     // leakage outside the labeled set
  double dt_used = 0.0;
};

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

inline double cphase_angle(const Eigen::Matrix4cd& U_prime) {
  std::array<double, 4> th{};
  for (int k = 0; k < 4; ++k) {
    if (std::abs(U_prime(k, k)) < 1e-6)
      throw ConvergenceError("cphase_angle: vanishing diagonal entry, phase undefined");
    th[k] = std::arg(U_prime(k, k));
  }
  return wrap_angle(th[3] - th[1] - th[2] + th[0]);
}

inline Eigen::Matrix4cd ideal_gate_from(const Eigen::Matrix4cd& U_prime) {
  Eigen::Matrix4cd U_id = Eigen::Matrix4cd::Zero();
  for (int k = 0; k < 4; ++k) {
    const std::complex<double> d = U_prime(k, k);
    if (std::abs(d) < 1e-6)
      throw ConvergenceError("ideal_gate_from: vanishing diagonal entry");
    U_id(k, k) = d / std::abs(d);
  }
  return U_id;
}

// Average fidelity over uniformly distributed two-qubit states, valid with
// leakage (U' need not be unitary).
inline double average_fidelity(const Eigen::Matrix4cd& U_prime, const Eigen::Matrix4cd& U_id) {
  const std::complex<double> tr_cross = (U_id.adjoint() * U_prime).trace();
  const double tr_norm = (U_prime.adjoint() * U_prime).trace().real();
  return (std::norm(tr_cross) + tr_norm) / 20.0;
}

struct GateSimOptions {
  PropagationSettings propagation;
  bool concurrent_inputs = true;
  int leakage_channels = 10;
};

namespace detail {

inline std::array<int, 4> idle_qubit_indices(const LabeledSpectrum& idle) {
  std::array<int, 4> idx{};
  const std::array<Label, 4> labels{make_label(0, 0, 0, 0), make_label(0, 1, 0, 0),
                                    make_label(1, 0, 0, 0), make_label(1, 1, 0, 0)};
  for (int q = 0; q < 4; ++q) {
    const LabeledLevel* lv = idle.find(labels[q]);
    if (!lv) throw LabelingError("idle spectrum is missing qubit label " + labels[q].str());
    idx[q] = lv->eig_index;
  }
  return idx;  // order 00, 01, 10, 11
}

}  // namespace detail

// Leakage decomposition of final states over the labeled idle eigenstates
// outside the qubit subspace, plus a remainder bucket.
inline void leakage_budget(const std::array<StateVector, 4>& finals,
                           const LabeledSpectrum& idle, GateResult& result,
                           int max_channels = 10) {
  const std::array<int, 4> qidx = detail::idle_qubit_indices(idle);
  for (int q = 0; q < 4; ++q) {
    double in_subspace = 0.0;
    for (int r = 0; r < 4; ++r)
      in_subspace += std::norm(idle.vectors.col(qidx[r]).dot(finals[q]));
    result.leakage[q] = 1.0 - in_subspace;
    double assigned = 0.0;
    int used = 0;
    for (const LabeledLevel& lv : idle.levels) {
      if (used >= max_channels) break;
      if (lv.label.is_qubit_state()) continue;
      const double p = std::norm(idle.vectors.col(lv.eig_index).dot(finals[q]));
      result.channels[q].push_back({lv.label, p});
      assigned += p;
      ++used;
    }
    result.channel_remainder[q] = result.leakage[q] - assigned;
  }
}

// Simulate the gate: four propagations from the labeled idle eigenstates and
// the projection back onto them. When settings request certification, the
// dt-halving certificate runs on the |11> input and the certified step is
// reused for the other inputs.
inline GateResult compute_gate_matrix(const HamiltonianFamily& family,
                                      const LabeledSpectrum& idle,
                                      const PulseSchedule& schedule,
                                      const GateSimOptions& opts = {}) {
  const std::array<int, 4> qidx = detail::idle_qubit_indices(idle);
  GateResult res;
  res.T_g = schedule.T_g;

  PropagationSettings st = opts.propagation;
  double dt = st.dt;
  if (st.certify && schedule.T_g > 0.0) {
    StateVector psi11 = idle.vectors.col(qidx[3]);
    StateVector ref = propagate_once(family, psi11, schedule, st, dt);
    bool ok = false;
    for (int h = 0; h < st.max_halvings; ++h) {
      const StateVector finer = propagate_once(family, psi11, schedule, st, 0.5 * dt);
      if ((finer - ref).norm() < st.certificate_tol) {
        ok = true;
        break;
      }
      dt *= 0.5;
      ref = finer;
    }
    if (!ok) throw ConvergenceError("compute_gate_matrix: dt certificate did not converge");
  }
  res.dt_used = dt;

  std::array<StateVector, 4> finals;
  auto run_input = [&](int q) {
    return propagate_once(family, idle.vectors.col(qidx[q]), schedule, st, dt);
  };
  if (opts.concurrent_inputs) {
    std::array<std::future<StateVector>, 4> futs;
    for (int q = 0; q < 4; ++q) futs[q] = std::async(std::launch::async, run_input, q);
    for (int q = 0; q < 4; ++q) finals[q] = futs[q].get();
  } else {
    for (int q = 0; q < 4; ++q) finals[q] = run_input(q);
  }

  for (int col = 0; col < 4; ++col)
    for (int row = 0; row < 4; ++row)
      res.U_prime(row, col) = idle.vectors.col(qidx[row]).dot(finals[col]);

  res.U_id = ideal_gate_from(res.U_prime);
  res.theta_cphase = cphase_angle(res.U_prime);
  res.avg_fidelity = average_fidelity(res.U_prime, res.U_id);
  leakage_budget(finals, idle, res, opts.leakage_channels);
  return res;
}

struct CalibrationResult {
  double T_g = 0.0;
  GateResult gate;
  bool degenerate = false;  // no rotation across the bracket
  std::vector<std::pair<double, double>> trace;  // (T_g, unwrapped angle)
};

// Secant iteration on the unwrapped CPHASE angle. The angle grows nearly
// linearly and vanishes at T_g = 0, which anchors the unwrapping: the first
// bracket point must carry a true angle inside (-pi, pi].
inline CalibrationResult calibrate_gate_time(const std::function<GateResult(double)>& simulate,
                                             double bracket_lo, double bracket_hi,
                                             double target = M_PI, double tol = 1e-3,
                                             int max_iter = 12) {
  if (!(bracket_lo > 0.0 && bracket_hi > bracket_lo))
    throw ConfigError("calibrate_gate_time: bad bracket");
  CalibrationResult out;
  GateResult g_lo = simulate(bracket_lo);
  double th_lo = g_lo.theta_cphase;  // assumed unwrapped at the low end
  out.trace.push_back({bracket_lo, th_lo});
  GateResult g_hi = simulate(bracket_hi);
  const double pred_hi = th_lo * bracket_hi / bracket_lo;  // linear through origin
  double th_hi = g_hi.theta_cphase +
                 2.0 * M_PI * std::round((pred_hi - g_hi.theta_cphase) / (2.0 * M_PI));
  out.trace.push_back({bracket_hi, th_hi});

  if (std::abs(th_hi - th_lo) < 1e-6) {
    out.degenerate = true;
    out.T_g = bracket_lo;
    out.gate = g_lo;
    return out;
  }
  if ((target - th_lo) * (target - th_hi) > 0.0)
    throw ConvergenceError("calibrate_gate_time: target angle not bracketed");

  double a = bracket_lo, fa = th_lo - target;
  double b = bracket_hi, fb = th_hi - target;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fb - fa) < 1e-30) break;
    double c = b - fb * (b - a) / (fb - fa);  // secant
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    GateResult g = simulate(c);
    const double pred = th_lo * c / bracket_lo;
    const double th = g.theta_cphase +
                      2.0 * M_PI * std::round((pred - g.theta_cphase) / (2.0 * M_PI));
    out.trace.push_back({c, th});
    const double fc = th - target;
    if (std::abs(fc) < tol) {
      out.T_g = c;
      out.gate = g;
      return out;
    }
    if (fa * fc <= 0.0) {
      b = c;
      fb = fc;
    } else {
      a = c;
      fa = fc;
    }
  }
  throw ConvergenceError("calibrate_gate_time: did not reach |theta - target| < tol");
}

// Unwrap a sequence of wrapped angles sampled along increasing T_g so the
// result is continuous (angles accumulate roughly linearly with T_g).
inline std::vector<double> unwrap_angles(const std::vector<double>& wrapped) {
  std::vector<double> out(wrapped.size());
  if (wrapped.empty()) return out;
  out[0] = wrapped[0];
  for (std::size_t i = 1; i < wrapped.size(); ++i) {
    out[i] = wrapped[i] +
             2.0 * M_PI * std::round((out[i - 1] - wrapped[i]) / (2.0 * M_PI));
    // prefer forward continuation when the previous step suggests a trend
    if (i >= 2) {
      const double pred = 2.0 * out[i - 1] - out[i - 2];
      out[i] = wrapped[i] + 2.0 * M_PI * std::round((pred - wrapped[i]) / (2.0 * M_PI));
    }
  }
  return out;
}

}  // namespace dtc
