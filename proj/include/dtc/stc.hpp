#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <vector>

#include "dtc/constants.hpp"
#include "dtc/errors.hpp"

namespace dtc {

// Three-mode bosonic network for the single-transmon-coupler comparison:
// two qubits exchange-coupled through one coupler mode (mode 3), plus a weak
// direct qubit-qubit coupling. Kerr nonlinearities model the transmon
// anharmonicity.
struct StcParams {
  std::array<double, 3> omega{};   // rad/s; omega[2] is the coupler
  std::array<double, 3> kerr{};    // rad/s; anharmonicities W_ii
  double g13 = 0.0;                // rad/s
  double g23 = 0.0;
  double g12 = 0.0;
  int levels_per_mode = 6;

  void validate() const {
    if (levels_per_mode < 4) throw ConfigError("stc: levels_per_mode must be >= 4");
    for (double w : omega)
      if (!(w > 0.0)) throw ConfigError("stc: mode frequencies must be positive");
  }

  static StcParams reference_design() {
    StcParams p;
    p.omega = {units::ghz_to_rad(5.0), units::ghz_to_rad(5.0), units::ghz_to_rad(7.0)};
    p.kerr = {units::mhz_to_rad(250.0), units::mhz_to_rad(250.0), units::mhz_to_rad(250.0)};
    p.g13 = units::mhz_to_rad(250.0);
    p.g23 = units::mhz_to_rad(250.0);
    p.g12 = units::mhz_to_rad(25.0);
    return p;
  }
};

// H = sum_i [omega_i a_i^dag a_i - (W_ii/2) a_i^dag^2 a_i^2]
//   + sum_{i<j} g_ij (a_i^dag a_j + a_j^dag a_i)
// Number-conserving couplings keep the matrix real symmetric in the Fock
// basis. Construction works down to two levels per mode (where the Kerr
// terms vanish and the network reduces to an XY model); zeta extraction
// enforces the >= 4 levels required for converged shifts.
inline Eigen::MatrixXd build_stc_hamiltonian(const StcParams& p) {
  if (p.levels_per_mode < 2) throw ConfigError("stc: levels_per_mode must be >= 2");
  for (double w : p.omega)
    if (!(w > 0.0)) throw ConfigError("stc: mode frequencies must be positive");
  const int n = p.levels_per_mode;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) a(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  const Eigen::MatrixXd ad = a.transpose();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd num = ad * a;
  const Eigen::MatrixXd kerr = ad * ad * a * a;

  auto kron = [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index j = 0; j < A.cols(); ++j)
        out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
  };
  auto kron3 = [&](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                   const Eigen::MatrixXd& C) { return kron(kron(A, B), C); };

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n * n * n, n * n * n);
  const std::array<std::array<const Eigen::MatrixXd*, 3>, 3> placed{{
      {{&num, &id, &id}}, {{&id, &num, &id}}, {{&id, &id, &num}}}};
  for (int i = 0; i < 3; ++i) {
    H += p.omega[i] * kron3(*placed[i][0], *placed[i][1], *placed[i][2]);
    std::array<const Eigen::MatrixXd*, 3> kp{&id, &id, &id};
    kp[i] = &kerr;
    H -= 0.5 * p.kerr[i] * kron3(*kp[0], *kp[1], *kp[2]);
  }
  auto hop = [&](int i, int j) {
    std::array<const Eigen::MatrixXd*, 3> ops{&id, &id, &id};
    ops[i] = &ad;
    ops[j] = &a;
    return kron3(*ops[0], *ops[1], *ops[2]);
  };
  H += p.g13 * (hop(0, 2) + hop(2, 0));
  H += p.g23 * (hop(1, 2) + hop(2, 1));
  H += p.g12 * (hop(0, 1) + hop(1, 0));
  return H;
}

struct StcPoint {
  double omega2 = 0.0;  // rad/s
  double omega3 = 0.0;  // rad/s
  double zeta_zz = std::numeric_limits<double>::quiet_NaN();  // rad/s
  bool in_straddling_band = false;
  bool ok = true;
  std::string message;
};

// zeta_ZZ from the dense spectrum: Fock-product labeling by maximum overlap
// with ambiguity detection between competing product labels.
inline double stc_zeta_zz(const StcParams& p, double tie_tol = 1e-6) {
  p.validate();
  const Eigen::MatrixXd H = build_stc_hamiltonian(p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const int n = p.levels_per_mode;
  auto fock = [&](int i, int j, int k) { return (i * n + j) * n + k; };
  const std::array<std::array<int, 3>, 4> labels{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}};
  std::array<double, 4> energy{};
  std::array<int, 4> pick{};
  for (int q = 0; q < 4; ++q) {
    const int row = fock(labels[q][0], labels[q][1], labels[q][2]);
    int best = -1;
    double bestv = -1.0, second = -1.0;
    for (int s = 0; s < es.eigenvalues().size(); ++s) {
      const double o = es.eigenvectors()(row, s) * es.eigenvectors()(row, s);
      if (o > bestv) {
        second = bestv;
        bestv = o;
        best = s;
      } else if (o > second) {
        second = o;
      }
    }
    if (bestv - second < tie_tol)
      throw LabelingError("stc: ambiguous Fock label assignment");
    pick[q] = best;
    energy[q] = es.eigenvalues()(best);
  }
  for (int q = 1; q < 4; ++q)
    for (int r = 0; r < q; ++r)
      if (pick[q] == pick[r]) throw LabelingError("stc: two labels claim one eigenstate");
  return energy[3] - energy[1] - energy[2] + energy[0];
}

// Map zeta_ZZ(omega2, omega3) on a rectangular grid. The straddling band is
// |omega2 - omega1| < kerr (qubit anharmonicity). Labeling failures are
// flagged per point, not fatal.
inline std::vector<StcPoint> stc_zz_sweep(const StcParams& base,
                                          const std::vector<double>& omega2_grid,
                                          const std::vector<double>& omega3_grid,
                                          int workers = 1) {
  for (std::size_t i = 1; i < omega2_grid.size(); ++i)
    if (!(omega2_grid[i] > omega2_grid[i - 1]))
      throw ConfigError("stc: omega2 grid must be increasing");
  for (std::size_t i = 1; i < omega3_grid.size(); ++i)
    if (!(omega3_grid[i] > omega3_grid[i - 1]))
      throw ConfigError("stc: omega3 grid must be increasing");
  std::vector<StcPoint> out(omega2_grid.size() * omega3_grid.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t i = idx / omega3_grid.size();
      const std::size_t j = idx % omega3_grid.size();
      StcPoint pt;
      pt.omega2 = omega2_grid[i];
      pt.omega3 = omega3_grid[j];
      pt.in_straddling_band = std::abs(pt.omega2 - base.omega[0]) < base.kerr[0];
      StcParams p = base;
      p.omega[1] = pt.omega2;
      p.omega[2] = pt.omega3;
      try {
        pt.zeta_zz = stc_zeta_zz(p);
      } catch (const Error& e) {
        pt.ok = false;
        pt.message = e.what();
      }
      out[idx] = pt;
    }
  };
  const std::size_t total = out.size();
  const int nw = std::max(workers, 1);
  std::vector<std::future<void>> futs;
  const std::size_t chunk = (total + nw - 1) / nw;
  for (int w = 0; w < nw; ++w) {
    const std::size_t b = std::min<std::size_t>(w * chunk, total);
    const std::size_t e = std::min<std::size_t>(b + chunk, total);
    if (b < e) futs.push_back(std::async(std::launch::async, run, b, e));
  }
  for (auto& f : futs) f.get();
  return out;
}

}  // namespace dtc
