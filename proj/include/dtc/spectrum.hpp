#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dtc/charge_basis.hpp"
#include "dtc/circuit.hpp"
#include "dtc/hamiltonian.hpp"
#include "dtc/lanczos.hpp"

namespace dtc {

// Excitation label |ij>|kl>: i,j qubit excitations (modes 1,2), k,l coupler
// excitations (modes 3,4).
struct Label {
  std::array<int, 4> n{0, 0, 0, 0};

  bool operator==(const Label& o) const { return n == o.n; }
  bool operator<(const Label& o) const { return n < o.n; }
  bool is_qubit_state() const { return n[2] == 0 && n[3] == 0 && n[0] <= 1 && n[1] <= 1; }

  std::string str() const {
    std::ostringstream os;
    os << n[0] << n[1] << "|" << n[2] << n[3];
    return os.str();
  }
};

inline Label make_label(int i, int j, int k, int l) { return Label{{i, j, k, l}}; }

// Products of single-mode transmon eigenstates of the uncoupled Hamiltonian
// (loop junction and off-diagonal charging zeroed); used to seed labels.
struct ReferenceBasis {
  int cutoff = 0;
  int levels_per_mode = 0;
  std::array<Eigen::MatrixXd, 4> mode_vecs;  // (2N+1) x levels_per_mode
  std::vector<Label> labels;

  // coefficients of psi in the truncated product eigenbasis,
  // index ((a*n + b)*n + c)*n + d
  Eigen::VectorXcd product_coefficients(const Eigen::VectorXcd& psi) const {
    const int L = 2 * cutoff + 1;
    const int n = levels_per_mode;
    // contract mode 1 (slowest index) first, then 2, 3, 4
    Eigen::VectorXcd cur = psi;
    Eigen::Index block = static_cast<Eigen::Index>(L) * L * L;  // size of one k1 slice
    for (int mode = 0; mode < 4; ++mode) {
      const Eigen::Index nblocks = cur.size() / (block * L);
      Eigen::VectorXcd next(nblocks * block * n);
      for (Eigen::Index b = 0; b < nblocks; ++b) {
        for (int a = 0; a < n; ++a) {
          const auto v = mode_vecs[mode].col(a);
          for (Eigen::Index r = 0; r < block; ++r) {
            std::complex<double> acc(0.0, 0.0);
            for (int k = 0; k < L; ++k) acc += v(k) * cur(b * L * block + k * block + r);
            next(b * n * block + a * block + r) = acc;
          }
        }
      }
      cur.swap(next);
      block /= L;
      block = std::max<Eigen::Index>(block, 1);
    }
    return cur;
  }
};

inline ReferenceBasis make_reference_basis(const DerivedParams& d, int N,
                                           int levels_per_mode = 5,
                                           int total_excitation_max = 4) {
  ReferenceBasis rb;
  rb.cutoff = N;
  rb.levels_per_mode = std::min(levels_per_mode, 2 * N + 1);
  for (int m = 0; m < 4; ++m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        single_mode_transmon_hamiltonian(d.W(m, m), d.omega_J[m], N));
    rb.mode_vecs[m] = es.eigenvectors().leftCols(rb.levels_per_mode);
    // fix gauge: make the largest-magnitude charge amplitude positive
    for (int c = 0; c < rb.mode_vecs[m].cols(); ++c) {
      Eigen::Index imax;
      rb.mode_vecs[m].col(c).cwiseAbs().maxCoeff(&imax);
      if (rb.mode_vecs[m](imax, c) < 0.0) rb.mode_vecs[m].col(c) *= -1.0;
    }
  }
  const int cap = rb.levels_per_mode - 1;
  for (int a = 0; a <= cap; ++a)
    for (int b = 0; b <= cap; ++b)
      for (int c = 0; c <= cap; ++c)
        for (int e = 0; e <= cap; ++e)
          if (a + b + c + e <= total_excitation_max) rb.labels.push_back(make_label(a, b, c, e));
  return rb;
}

struct LabeledLevel {
  Label label;
  double energy = 0.0;    // rad/s, relative to the (00|00) level
  double overlap2 = 0.0;  // |<reference|state>|^2 of the assignment
  int eig_index = 0;      // column in LabeledSpectrum::vectors
};

struct LabeledSpectrum {
  double theta_ex = 0.0;
  int cutoff = 0;
  std::vector<LabeledLevel> levels;  // ascending energy
  Eigen::VectorXd raw_values;        // unshifted eigenvalues, ascending
  Eigen::MatrixXcd vectors;          // column i <-> raw_values(i)
  double zeta_zz = std::numeric_limits<double>::quiet_NaN();  // rad/s

  const LabeledLevel* find(const Label& l) const {
    for (const auto& lv : levels)
      if (lv.label == l) return &lv;
    return nullptr;
  }

  double energy(const Label& l) const {
    const LabeledLevel* p = find(l);
    if (!p) throw LabelingError("label " + l.str() + " not present in spectrum");
    return p->energy;
  }
};

// zeta_ZZ = omega_11 - omega_10 - omega_01 (omega_00 = 0 by the offset).
inline double zz_strength(const LabeledSpectrum& s) {
  return s.energy(make_label(1, 1, 0, 0)) - s.energy(make_label(1, 0, 0, 0)) -
         s.energy(make_label(0, 1, 0, 0));
}

struct SpectrumOptions {
  int k = 14;                  // eigenpair count
  double residual_rel = 1e-8;  // residual target relative to ||H|| bound
  double label_tie_tol = 1e-6;
  int ref_levels_per_mode = 5;
  int ref_total_excitation = 4;
  LanczosOptions lanczos;
};

inline Eigenpairs lowest_eigenpairs(const HamiltonianAction& h, int k,
                                    const SpectrumOptions& opts = {}) {
  if (k > 40) throw ConfigError("lowest_eigenpairs: k must be <= 40");
  if (h.theta_dot_ex() != 0.0)
    throw ConfigError("lowest_eigenpairs: static spectra require theta_dot_ex = 0");
  LanczosOptions lo = opts.lanczos;
  lo.tol_abs = opts.residual_rel * h.norm_bound();
  return lanczos_lowest(h, k, lo);
}

namespace detail {

// Greedy max-overlap bijection. ovl(c, s) = |<candidate c | state s>|^2.
// Every state receives a label; a tie between two candidates for the same
// state within tie_tol is an ambiguity.
inline std::vector<int> greedy_assign(const Eigen::MatrixXd& ovl, double tie_tol,
                                      const std::vector<std::string>& cand_names,
                                      double theta_ex) {
  const int nc = static_cast<int>(ovl.rows());
  const int ns = static_cast<int>(ovl.cols());
  if (nc < ns) throw LabelingError("not enough reference candidates to label all states");
  std::vector<int> state_to_cand(ns, -1);
  std::vector<bool> cand_used(nc, false);
  for (int pick = 0; pick < ns; ++pick) {
    double best = -1.0;
    int bc = -1, bs = -1;
    for (int c = 0; c < nc; ++c) {
      if (cand_used[c]) continue;
      for (int s = 0; s < ns; ++s) {
        if (state_to_cand[s] >= 0) continue;
        if (ovl(c, s) > best) {
          best = ovl(c, s);
          bc = c;
          bs = s;
        }
      }
    }
    // ambiguity: a different free candidate claims the same state equally well
    for (int c = 0; c < nc; ++c) {
      if (c == bc || cand_used[c]) continue;
      if (best - ovl(c, bs) < tie_tol) {
        std::ostringstream os;
        os << "ambiguous label assignment at theta_ex=" << theta_ex << ": state " << bs
           << " claimed by " << cand_names[bc] << " (" << best << ") and " << cand_names[c]
           << " (" << ovl(c, bs) << ")";
        throw LabelingError(os.str());
      }
    }
    state_to_cand[bs] = bc;
    cand_used[bc] = true;
  }
  return state_to_cand;
}

inline LabeledSpectrum finalize_spectrum(double theta_ex, int cutoff, const Eigenpairs& eig,
                                         const std::vector<Label>& state_labels,
                                         const std::vector<double>& overlaps) {
  LabeledSpectrum out;
  out.theta_ex = theta_ex;
  out.cutoff = cutoff;
  out.raw_values = eig.values;
  out.vectors = eig.vectors;
  const int k = static_cast<int>(eig.values.size());
  double e0 = std::numeric_limits<double>::quiet_NaN();
  for (int s = 0; s < k; ++s)
    if (state_labels[s] == make_label(0, 0, 0, 0)) e0 = eig.values(s);
  if (std::isnan(e0)) throw LabelingError("ground label (00|00) not present among states");
  for (int s = 0; s < k; ++s)
    out.levels.push_back({state_labels[s], eig.values(s) - e0, overlaps[s], s});
  std::sort(out.levels.begin(), out.levels.end(),
            [](const LabeledLevel& a, const LabeledLevel& b) { return a.energy < b.energy; });
  const bool have_qubits = out.find(make_label(1, 1, 0, 0)) && out.find(make_label(1, 0, 0, 0)) &&
                           out.find(make_label(0, 1, 0, 0));
  if (have_qubits) out.zeta_zz = zz_strength(out);
  return out;
}

}  // namespace detail

// Label by maximum overlap with uncoupled product states.
inline LabeledSpectrum label_states(double theta_ex, int cutoff, const Eigenpairs& eig,
                                    const ReferenceBasis& rb, double tie_tol = 1e-6) {
  const int k = static_cast<int>(eig.values.size());
  const int nc = static_cast<int>(rb.labels.size());
  const int n = rb.levels_per_mode;
  Eigen::MatrixXd ovl(nc, k);
  for (int s = 0; s < k; ++s) {
    const Eigen::VectorXcd coef = rb.product_coefficients(eig.vectors.col(s));
    for (int c = 0; c < nc; ++c) {
      const auto& l = rb.labels[c].n;
      const Eigen::Index idx =
          ((static_cast<Eigen::Index>(l[0]) * n + l[1]) * n + l[2]) * n + l[3];
      ovl(c, s) = std::norm(coef(idx));
    }
  }
  std::vector<std::string> names(nc);
  for (int c = 0; c < nc; ++c) names[c] = rb.labels[c].str();
  const std::vector<int> s2c = detail::greedy_assign(ovl, tie_tol, names, theta_ex);
  std::vector<Label> labels(k);
  std::vector<double> overlaps(k);
  for (int s = 0; s < k; ++s) {
    labels[s] = rb.labels[s2c[s]];
    overlaps[s] = ovl(s2c[s], s);
  }
  return detail::finalize_spectrum(theta_ex, cutoff, eig, labels, overlaps);
}

// Label by adiabatic continuation: maximum overlap with the previous grid
// point's labeled eigenvectors.
inline LabeledSpectrum label_states(double theta_ex, int cutoff, const Eigenpairs& eig,
                                    const LabeledSpectrum& prev, double tie_tol = 1e-6) {
  const int k = static_cast<int>(eig.values.size());
  const int nc = static_cast<int>(prev.levels.size());
  Eigen::MatrixXd ovl(nc, k);
  std::vector<std::string> names(nc);
  for (int c = 0; c < nc; ++c) {
    names[c] = prev.levels[c].label.str();
    const auto& pv = prev.vectors.col(prev.levels[c].eig_index);
    for (int s = 0; s < k; ++s) ovl(c, s) = std::norm(pv.dot(eig.vectors.col(s)));
  }
  const std::vector<int> s2c = detail::greedy_assign(ovl, tie_tol, names, theta_ex);
  std::vector<Label> labels(k);
  std::vector<double> overlaps(k);
  for (int s = 0; s < k; ++s) {
    labels[s] = prev.levels[s2c[s]].label;
    overlaps[s] = ovl(s2c[s], s);
  }
  return detail::finalize_spectrum(theta_ex, cutoff, eig, labels, overlaps);
}

// One labeled eigensolve. `prev` enables continuation; otherwise labels are
// seeded from uncoupled products. `family` carries the shared structure.
inline LabeledSpectrum solve_labeled(const HamiltonianFamily& family, const ReferenceBasis& rb,
                                     double theta_ex, const SpectrumOptions& opts,
                                     const LabeledSpectrum* prev = nullptr) {
  const HamiltonianAction h = family.at(theta_ex, 0.0);
  SpectrumOptions o = opts;
  if (prev && prev->vectors.cols() > 0 && o.lanczos.initial.size() == 0)
    o.lanczos.initial = prev->vectors.col(prev->levels.front().eig_index);
  const Eigenpairs eig = lowest_eigenpairs(h, o.k, o);
  if (prev) return label_states(theta_ex, family.cutoff(), eig, *prev, o.label_tie_tol);
  return label_states(theta_ex, family.cutoff(), eig, rb, o.label_tie_tol);
}

struct T2Estimate {
  double t2_q1 = 0.0;   // s
  double t2_q2 = 0.0;   // s
  double slope_q1 = 0.0;  // d omega_10 / d Theta_ex, rad/s per rad
  double slope_q2 = 0.0;
};

// Dephasing-time estimate from the flux sensitivity of the qubit levels:
// T2 = |2 pi (A_phi/Phi0) d omega / d Theta_ex|^-1. Central differences with
// Richardson extrapolation (steps h and h/2).
inline T2Estimate estimate_t2(const HamiltonianFamily& family, const ReferenceBasis& rb,
                              double theta_ex, const SpectrumOptions& opts,
                              double a_phi = 1e-5, double h_step = 1e-3 * M_PI,
                              const LabeledSpectrum* center_hint = nullptr) {
  if (!(a_phi > 0.0)) throw ConfigError("estimate_t2: A_phi must be positive");
  LabeledSpectrum center;
  const LabeledSpectrum* c = center_hint;
  if (!c) {
    center = solve_labeled(family, rb, theta_ex, opts);
    c = &center;
  }
  const Label q1 = make_label(1, 0, 0, 0), q2 = make_label(0, 1, 0, 0);
  std::array<double, 4> off{+h_step, -h_step, +0.5 * h_step, -0.5 * h_step};
  std::array<double, 4> e1{}, e2{};
  for (int i = 0; i < 4; ++i) {
    const LabeledSpectrum s = solve_labeled(family, rb, theta_ex + off[i], opts, c);
    e1[i] = s.energy(q1);
    e2[i] = s.energy(q2);
  }
  T2Estimate out;
  const double d1_h = (e1[0] - e1[1]) / (2.0 * h_step);
  const double d1_h2 = (e1[2] - e1[3]) / h_step;
  const double d2_h = (e2[0] - e2[1]) / (2.0 * h_step);
  const double d2_h2 = (e2[2] - e2[3]) / h_step;
  out.slope_q1 = (4.0 * d1_h2 - d1_h) / 3.0;
  out.slope_q2 = (4.0 * d2_h2 - d2_h) / 3.0;
  // eigenvalue noise is far below the residual bound; treat smaller slopes
  // as indistinguishable from zero
  const double floor = 4.0 * 1e2 / h_step;
  auto t2_of = [&](double slope) {
    if (std::abs(slope) < floor) return std::numeric_limits<double>::infinity();
    return 1.0 / (2.0 * M_PI * a_phi * std::abs(slope));
  };
  out.t2_q1 = t2_of(out.slope_q1);
  out.t2_q2 = t2_of(out.slope_q2);
  return out;
}

}  // namespace dtc
