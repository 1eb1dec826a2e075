// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavy spectral work runs at the cutoffs stated with each
// criterion; wall time on two cores is about an hour and a half.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "dtc/gap_profile.hpp"
#include "dtc/gate.hpp"
#include "dtc/io.hpp"
#include "dtc/propagator.hpp"
#include "dtc/pulse.hpp"
#include "dtc/spectrum.hpp"
#include "dtc/stc.hpp"
#include "dtc/sweep.hpp"

using namespace dtc;
using Clock = std::chrono::steady_clock;

namespace {

struct CriterionResult {
  bool pass = true;
  std::ostringstream detail;
};

int g_failures = 0;

void report(int index, const std::string& name, const CriterionResult& r, double seconds) {
  std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << index << ": " << name
            << "  (" << static_cast<int>(seconds) << " s)\n";
  const std::string d = r.detail.str();
  if (!d.empty()) std::cout << d;
  std::cout.flush();
  if (!r.pass) ++g_failures;
}

bool check(CriterionResult& r, bool cond, const std::string& line) {
  r.detail << "    " << (cond ? "ok  " : "BAD ") << line << "\n";
  if (!cond) r.pass = false;
  return cond;
}

int accept_max_cutoff() {
  if (const char* env = std::getenv("DTCSIM_ACCEPT_MAXN")) {
    const int n = std::atoi(env);
    if (n >= 6) return n;
  }
  return 7;
}

// ---------------------------------------------------------------------------
// 1. Parameter regression against the reference design table
// ---------------------------------------------------------------------------
CriterionResult criterion1() {
  CriterionResult r;
  const DerivedParams d = derive_all(CircuitParams::reference_design());
  auto near = [](double v, double target, double tol) { return std::abs(v - target) <= tol; };
  check(r, near(units::rad_to_mhz(d.W(0, 0)), 296.0, 2.0),
        "W11/2pi = " + fmt12(units::rad_to_mhz(d.W(0, 0))) + " MHz (296 +- 2)");
  check(r, near(units::rad_to_mhz(d.W(2, 3)), 4.42, 0.1),
        "W34/2pi = " + fmt12(units::rad_to_mhz(d.W(2, 3))) + " MHz (4.42 +- 0.1)");
  check(r, near(units::rad_to_ghz(d.omega_J[0]), 11.9, 0.05),
        "omega_J1/2pi = " + fmt12(units::rad_to_ghz(d.omega_J[0])) + " GHz (11.9 +- 0.05)");
  check(r, near(units::rad_to_ghz(d.omega_J[4]), 7.2, 0.1),
        "omega_J5/2pi = " + fmt12(units::rad_to_ghz(d.omega_J[4])) + " GHz (7.2 +- 0.1)");

  // independent one-line evaluation of the coupling-rate formula
  const double table_g[6] = {1.7, 239.0, 5.7, 6.5, 270.0, 57.0};
  const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (int p = 0; p < 6; ++p) {
    const int i = pairs[p][0], j = pairs[p][1];
    const double oracle =
        0.5 * d.W(i, j) *
        std::sqrt((d.omega_design(i) + d.W(i, i)) * (d.omega_design(j) + d.W(j, j)) /
                  (d.W(i, i) * d.W(j, j)));
    check(r, std::abs(d.g(i, j) - oracle) <= 1e-12 * std::abs(oracle),
          "g" + std::to_string(i + 1) + std::to_string(j + 1) + " matches the formula oracle");
    const double g_mhz = units::rad_to_mhz(d.g(i, j));
    const double rel = std::abs(g_mhz - table_g[p]) / table_g[p];
    check(r, rel <= 0.20,
          "g" + std::to_string(i + 1) + std::to_string(j + 1) + "/2pi = " + fmt12(g_mhz) +
              " MHz vs table " + fmt12(table_g[p]) + " (" + fmt12(rel * 100) + "% off, +-20%)");
  }
  return r;
}

// ---------------------------------------------------------------------------
// 2 + 3. ZZ zeros and peak coupling on the omega4 = 8.5 GHz row at N = 7
// ---------------------------------------------------------------------------
void criteria2and3() {
  const auto t0 = Clock::now();
  const int N = 7;
  const CircuitParams p = CircuitParams::reference_design();
  SpectrumOptions so;
  so.k = 14;

  std::vector<double> grid;
  for (int i = 0; i <= 90; ++i) grid.push_back((0.55 + 0.005 * i) * M_PI);
  const ZZSweep sweep = sweep_zz(p, grid, {}, N, so, 1);

  CriterionResult r2;
  check(r2, sweep.failures.empty(), "row labeling completed without conflicts");
  const ZeroFindResult zeros = find_zz_zeros(p, p.omega_design(3), grid, sweep.zeta[0], N, so);
  std::ostringstream roots;
  for (double z : zeros.roots) roots << fmt12(z / M_PI) << "pi ";
  r2.detail << "    roots: " << roots.str() << "\n";
  check(r2, zeros.roots.size() == 2, "exactly two zero crossings on [0.55pi, pi]");
  if (zeros.roots.size() == 2) {
    check(r2, std::abs(zeros.roots[0] / M_PI - 0.61) <= 0.01,
          "first zero at " + fmt12(zeros.roots[0] / M_PI) + "pi (0.61pi +- 0.01pi)");
    check(r2, std::abs(zeros.roots[1] / M_PI - 0.63) <= 0.01,
          "second zero at " + fmt12(zeros.roots[1] / M_PI) + "pi (0.63pi +- 0.01pi)");
  }
  const auto t1 = Clock::now();
  report(2, "ZZ-coupling zeros near the idle flux (N=7)", r2,
         std::chrono::duration<double>(t1 - t0).count());

  CriterionResult r3;
  const double zeta_pi_mhz = units::rad_to_mhz(sweep.zeta[0].back());
  check(r3, std::abs(std::abs(zeta_pi_mhz) - 40.0) <= 4.0,
        "|zeta(pi)|/2pi = " + fmt12(std::abs(zeta_pi_mhz)) + " MHz (40 +- 10%)");
  const auto t2 = Clock::now();
  report(3, "peak coupling at full flux", r3, std::chrono::duration<double>(t2 - t1).count());
}

// ---------------------------------------------------------------------------
// 4. Zero-contour orientation in and out of the straddling regime
// ---------------------------------------------------------------------------
CriterionResult criterion4() {
  CriterionResult r;
  const int N = 5;
  SpectrumOptions so;
  so.k = 14;
  std::vector<double> theta_grid, omega4_grid;
  for (int i = 0; i < 20; ++i) theta_grid.push_back((0.35 + (1.0 - 0.35) * i / 19.0) * M_PI);
  for (int i = 0; i < 20; ++i)
    omega4_grid.push_back(units::ghz_to_rad(7.0 + 3.0 * i / 19.0));

  auto row_has_zero = [](const std::vector<double>& zrow) {
    for (std::size_t i = 0; i + 1 < zrow.size(); ++i) {
      if (std::isnan(zrow[i]) || std::isnan(zrow[i + 1])) continue;
      if (zrow[i] * zrow[i + 1] < 0.0 &&
          std::max(std::abs(zrow[i]), std::abs(zrow[i + 1])) > units::mhz_to_rad(1e-3))
        return true;
    }
    return false;
  };

  for (double omega2_ghz : {5.7, 5.1}) {
    CircuitParams p = CircuitParams::reference_design();
    p.omega_design(1) = units::ghz_to_rad(omega2_ghz);
    const ZZSweep sweep = sweep_zz(p, theta_grid, omega4_grid, N, so, 2);
    std::vector<int> has(omega4_grid.size());
    std::ostringstream mask;
    for (std::size_t row = 0; row < omega4_grid.size(); ++row) {
      has[row] = row_has_zero(sweep.zeta[row]) ? 1 : 0;
      mask << has[row];
    }
    const bool out_of_straddling = omega2_ghz > 5.4;
    r.detail << "    omega2 = " << fmt12(omega2_ghz) << " GHz rows with zeros (omega4 7->10): "
             << mask.str() << "\n";
    bool monotone = true;
    for (std::size_t row = 1; row < has.size(); ++row) {
      if (out_of_straddling ? has[row] < has[row - 1] : has[row] > has[row - 1])
        monotone = false;
    }
    if (out_of_straddling) {
      check(r, has.front() == 0 && has.back() == 1 && monotone,
            "omega2 = 5.7 GHz: zero contour has a lower-bounded omega4");
    } else {
      check(r, has.front() == 1 && has.back() == 0 && monotone,
            "omega2 = 5.1 GHz: zero contour has an upper-bounded omega4");
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// 5. CZ calibration, fidelity, and the leakage budget
// ---------------------------------------------------------------------------
CriterionResult criterion5() {
  CriterionResult r;
  const int n_cal = 6;
  const int n_max = accept_max_cutoff();
  const CircuitParams p = CircuitParams::reference_design();
  SpectrumOptions so;
  so.k = 16;

  const auto tp0 = Clock::now();
  const GapProfile raw = extract_gap_profile(p, n_cal, 0.61 * M_PI, M_PI, 301, so);
  const GapProfile gp = modified_gap(raw, 0.2);
  const auto tp1 = Clock::now();
  r.detail << "    profile (N=6, 301 pts): g/2pi = " << fmt12(units::rad_to_mhz(gp.g))
           << " MHz, theta_g = " << fmt12(gp.theta_ex_g / M_PI) << "pi, "
           << static_cast<int>(std::chrono::duration<double>(tp1 - tp0).count()) << " s\n";

  PulseDesignOptions po;
  po.A = -0.17;

  const DerivedParams d = derive_all(p);
  HamiltonianFamily fam6(d, n_cal);
  const ReferenceBasis rb6 = make_reference_basis(d, n_cal);
  const LabeledSpectrum idle6 = solve_labeled(fam6, rb6, 0.61 * M_PI, so);

  GateSimOptions go;
  go.propagation.certify = true;
  go.concurrent_inputs = true;

  auto simulate6 = [&](double tg_ns) {
    const PulseSchedule ps = design_pulse(gp, tg_ns * units::nanosecond, po);
    return compute_gate_matrix(fam6, idle6, ps, go);
  };
  CalibrationResult cal;
  try {
    cal = calibrate_gate_time(simulate6, 20.0, 32.0, M_PI, 1e-3);
  } catch (const Error& e) {
    check(r, false, std::string("calibration failed: ") + e.what());
    return r;
  }
  const auto tp2 = Clock::now();
  r.detail << "    calibration trace:";
  for (const auto& [tg, th] : cal.trace)
    r.detail << " (" << fmt12(tg) << " ns, " << fmt12(th / M_PI) << "pi)";
  r.detail << "\n";
  check(r, std::abs(cal.T_g - 24.0) <= 2.0,
        "T_CZ = " + fmt12(cal.T_g) + " ns (24 +- 2 ns), theta = " +
            fmt12(cal.gate.theta_cphase / M_PI) + "pi");
  check(r, cal.gate.avg_fidelity >= 0.999,
        "avg fidelity at N=6: " + fmt12(cal.gate.avg_fidelity) + " (>= 0.999)");
  r.detail << "    calibration took "
           << static_cast<int>(std::chrono::duration<double>(tp2 - tp1).count()) << " s, "
           << "dt certified at " << fmt12(cal.gate.dt_used / units::nanosecond) << " ns\n";

  // cutoff convergence trend with the same designed pulse
  const PulseSchedule pulse = design_pulse(gp, cal.T_g * units::nanosecond, po);
  GateResult best_gate = cal.gate;
  r.detail << "    fidelity trend:";
  for (int n : {4, 5, n_max}) {
    if (n == n_cal) continue;
    HamiltonianFamily fam(d, n);
    const ReferenceBasis rb = make_reference_basis(d, n);
    const LabeledSpectrum idle = solve_labeled(fam, rb, 0.61 * M_PI, so);
    const GateResult g = compute_gate_matrix(fam, idle, pulse, go);
    r.detail << " F(N=" << n << ") = " << fmt12(g.avg_fidelity);
    if (n == n_max) best_gate = g;
  }
  r.detail << " F(N=6) = " << fmt12(cal.gate.avg_fidelity) << "\n";
  check(r, best_gate.avg_fidelity >= 0.9999,
        "avg fidelity at N=" + std::to_string(n_max) + ": " + fmt12(best_gate.avg_fidelity) +
            " (>= 0.9999)");

  const double infid = 1.0 - best_gate.avg_fidelity;
  const double frac01 = best_gate.leakage[1] / (4.0 * infid);
  const double frac11 = best_gate.leakage[3] / (4.0 * infid);
  r.detail << "    leakage fractions of infidelity at N=" << n_max << ": 01 -> "
           << fmt12(frac01 * 100) << "%, 11 -> " << fmt12(frac11 * 100) << "%\n";
  check(r, frac11 > 0.5, "input |11> fraction " + fmt12(frac11 * 100) + "% (> 50%)");
  check(r, frac01 >= 0.10 && frac01 <= 0.35,
        "input |01> fraction " + fmt12(frac01 * 100) + "% (in [10%, 35%])");

  // dominant channels for the two leaking inputs
  for (int q : {1, 3}) {
    const char* names[4] = {"00", "01", "10", "11"};
    const GateResult::Channel* top = nullptr;
    for (const auto& c : best_gate.channels[q])
      if (!top || c.p > top->p) top = &c;
    if (top)
      r.detail << "    dominant |" << names[q] << "> channel: " << top->label.str() << " ("
               << fmt12(top->p) << ")\n";
  }
  return r;
}

// ---------------------------------------------------------------------------
// 6. Flux-noise dephasing estimates
// ---------------------------------------------------------------------------
CriterionResult criterion6() {
  CriterionResult r;
  const int N = 7;
  const DerivedParams d = derive_all(CircuitParams::reference_design());
  HamiltonianFamily fam(d, N);
  const ReferenceBasis rb = make_reference_basis(d, N);
  SpectrumOptions so;
  so.k = 10;

  const T2Estimate idle = estimate_t2(fam, rb, 0.61 * M_PI, so, 1e-5);
  const double q1_us = idle.t2_q1 * 1e6, q2_us = idle.t2_q2 * 1e6;
  check(r, q1_us >= 130.0 && q1_us <= 520.0,
        "idle T2 Q1 = " + fmt12(q1_us) + " us (260 us within x2)");
  check(r, q2_us >= 215.0 && q2_us <= 860.0,
        "idle T2 Q2 = " + fmt12(q2_us) + " us (430 us within x2)");

  // minima over the gate flux range, tracked with labeled continuation
  double min1 = 1e300, min2 = 1e300;
  const int npts = 33;
  LabeledSpectrum center, prev_center;
  bool have_prev = false;
  for (int i = 0; i < npts; ++i) {
    const double th = (0.61 + (1.0 - 0.61) * i / (npts - 1)) * M_PI;
    center = solve_labeled(fam, rb, th, so, have_prev ? &prev_center : nullptr);
    const T2Estimate e = estimate_t2(fam, rb, th, so, 1e-5, 1e-3 * M_PI, &center);
    min1 = std::min(min1, e.t2_q1 * 1e6);
    min2 = std::min(min2, e.t2_q2 * 1e6);
    prev_center = center;
    have_prev = true;
  }
  check(r, min1 >= 15.0 && min1 <= 60.0,
        "min T2 Q1 over [0.61pi, pi] = " + fmt12(min1) + " us (30 us within x2)");
  check(r, min2 >= 2.5 && min2 <= 10.0,
        "min T2 Q2 over [0.61pi, pi] = " + fmt12(min2) + " us (5 us within x2)");
  return r;
}

// ---------------------------------------------------------------------------
// 7. Single-transmon-coupler contrast
// ---------------------------------------------------------------------------
CriterionResult criterion7() {
  CriterionResult r;
  const StcParams base = StcParams::reference_design();
  std::vector<double> w2, w3;
  for (double v = 4.025; v <= 5.975 + 1e-9; v += 0.05) w2.push_back(units::ghz_to_rad(v));
  for (double v = 6.5; v <= 8.0 + 1e-9; v += 0.1) w3.push_back(units::ghz_to_rad(v));
  const auto pts = stc_zz_sweep(base, w2, w3, 2);
  const std::size_t n3 = w3.size();

  int bad_points = 0;
  for (const auto& pt : pts)
    if (!pt.ok) ++bad_points;
  check(r, bad_points == 0,
        "all grid points labeled (" + std::to_string(bad_points) + " ambiguous)");

  const double tol = units::mhz_to_rad(1e-3);
  bool zero_inside = false, flip_outside = false;
  // scan along omega3 (within a row)
  for (std::size_t i = 0; i < w2.size(); ++i) {
    for (std::size_t j = 0; j + 1 < n3; ++j) {
      const auto& a = pts[i * n3 + j];
      const auto& b = pts[i * n3 + j + 1];
      if (!a.ok || !b.ok) continue;
      const bool crossing = a.zeta_zz * b.zeta_zz < 0.0 &&
                            std::max(std::abs(a.zeta_zz), std::abs(b.zeta_zz)) > tol;
      if (!crossing) continue;
      if (a.in_straddling_band)
        zero_inside = true;
      else
        flip_outside = true;
    }
  }
  // scan along omega2 (across rows), outside-band pairs only
  for (std::size_t j = 0; j < n3; ++j) {
    for (std::size_t i = 0; i + 1 < w2.size(); ++i) {
      const auto& a = pts[i * n3 + j];
      const auto& b = pts[(i + 1) * n3 + j];
      if (!a.ok || !b.ok) continue;
      if (a.in_straddling_band || b.in_straddling_band) continue;
      if (a.zeta_zz * b.zeta_zz < 0.0 &&
          std::max(std::abs(a.zeta_zz), std::abs(b.zeta_zz)) > tol)
        flip_outside = true;
    }
  }
  check(r, zero_inside, "zero contour exists inside the straddling band");
  check(r, !flip_outside, "no sign change outside |omega2 - omega1| < 250 MHz");
  return r;
}

// ---------------------------------------------------------------------------
// 8. Property battery
// ---------------------------------------------------------------------------
CriterionResult criterion8() {
  CriterionResult r;
  const DerivedParams d = derive_all(CircuitParams::reference_design());

  {  // hermiticity of the matrix-free action, moving flux included
    const HamiltonianAction h = assemble_hamiltonian(d, 1.1, 4.2e8, 3);
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    StateVector x(h.dim()), y(h.dim());
    for (Eigen::Index i = 0; i < h.dim(); ++i) {
      x(i) = {g(rng), g(rng)};
      y(i) = {g(rng), g(rng)};
    }
    x.normalize();
    y.normalize();
    const std::complex<double> a = y.dot(h.apply(x)), b = h.apply(y).dot(x);
    check(r, std::abs(a - b) < 1e-12 * h.norm_bound(), "apply is Hermitian on random states");
  }
  {  // flux parity and periodicity of the static spectrum (dense, N=1)
    auto vals = [&](double th) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
          assemble_hamiltonian(d, th, 0.0, 1).densify());
      return Eigen::VectorXd(es.eigenvalues());
    };
    const Eigen::VectorXd v = vals(0.77), vm = vals(-0.77), vp = vals(0.77 + 2 * M_PI);
    const double scale = v.cwiseAbs().maxCoeff();
    check(r, (v - vm).cwiseAbs().maxCoeff() < 1e-9 * scale, "spectrum is even in the flux");
    check(r, (v - vp).cwiseAbs().maxCoeff() < 1e-9 * scale, "spectrum is 2pi-periodic");
  }
  {  // dense-oracle equivalence of apply at N=2
    const HamiltonianAction h = assemble_hamiltonian(d, 0.61 * M_PI, 3e8, 2);
    const Eigen::MatrixXcd dense = h.densify();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      StateVector x(h.dim());
      for (Eigen::Index i = 0; i < h.dim(); ++i) x(i) = {g(rng), g(rng)};
      x.normalize();
      worst = std::max(worst, (h.apply(x) - dense * x).norm() / dense.norm());
    }
    check(r, worst < 1e-10, "matrix-free apply matches the dense operator to 1e-10");
  }
  {  // eigenpair residuals at the production solver settings
    HamiltonianFamily fam(d, 5);
    SpectrumOptions so;
    so.k = 12;
    const HamiltonianAction h = fam.at(0.8 * M_PI, 0.0);
    const Eigenpairs e = lowest_eigenpairs(h, 12, so);
    double worst = 0.0;
    for (int i = 0; i < 12; ++i)
      worst = std::max(worst,
                       (h.apply(e.vectors.col(i)) - e.values(i) * e.vectors.col(i)).norm());
    check(r, worst <= 1e-8 * h.norm_bound(), "eigenpair residuals within 1e-8 ||H||");
  }
  {  // fidelity hand values and phase invariances
    Eigen::Matrix4cd I = Eigen::Matrix4cd::Identity();
    Eigen::Matrix4cd cz = I;
    cz(3, 3) = -1.0;
    check(r, std::abs(average_fidelity(I, I) - 1.0) < 1e-14, "F(identity) = 1");
    check(r, std::abs(average_fidelity(Eigen::Matrix4cd::Zero(), I)) < 1e-14, "F(zero) = 0");
    check(r, std::abs(average_fidelity(cz, I) - 0.4) < 1e-14, "F(CZ vs identity) = 0.4");
    check(r, std::abs(cphase_angle(cz) - M_PI) < 1e-12, "theta_CPHASE(CZ) = pi");
    Eigen::Vector4cd ph;
    ph << 1.0, std::polar(1.0, 0.4), std::polar(1.0, -0.9), std::polar(1.0, 0.4 - 0.9);
    const Eigen::Matrix4cd D = ph.asDiagonal();
    check(r, std::abs(cphase_angle((D * cz).eval()) - M_PI) < 1e-12,
          "theta_CPHASE invariant under single-qubit phases");
  }
  {  // pulse symmetry and endpoint flatness on a synthetic profile
    std::vector<double> th = linspace(0.61 * M_PI, M_PI, 501);
    std::vector<double> gap(th.size());
    for (std::size_t i = 0; i < th.size(); ++i) {
      const double del = units::ghz_to_rad(3.1) * (th[i] - 0.934 * M_PI);
      gap[i] = std::sqrt(del * del + std::pow(units::mhz_to_rad(214.0), 2));
    }
    const GapProfile gp = modified_gap(gap_profile_from_curve(th, gap), 0.2);
    const PulseSchedule ps = design_pulse(gp, 24e-9, {});
    bool symmetric = true;
    for (double f : {0.05, 0.2, 0.35, 0.45})
      if (std::abs(ps.theta_at(f * ps.T_g) - ps.theta_at((1 - f) * ps.T_g)) > 1e-9)
        symmetric = false;
    check(r, symmetric, "pulse is time-symmetric to 1e-9");
    double vmax = 0.0;
    for (double v : ps.theta_dot) vmax = std::max(vmax, std::abs(v));
    check(r, std::abs(ps.theta_dot_at(0.0)) < 1e-6 * vmax &&
                 std::abs(ps.theta_dot_at(ps.T_g)) < 1e-6 * vmax,
          "pulse endpoints are flat");
  }
  {  // dt-halving certificate on a short N=2 evolution
    HamiltonianFamily fam(d, 2);
    const ReferenceBasis rb = make_reference_basis(d, 2);
    SpectrumOptions so;
    so.k = 6;
    const LabeledSpectrum s = solve_labeled(fam, rb, 0.61 * M_PI, so);
    StateVector psi = s.vectors.col(0);
    PropagationSettings st;
    st.dt = 2e-3 * units::nanosecond;
    PulseSchedule hold = constant_hold(0.7 * M_PI, 1e-9);
    const StateVector a = propagate_once(fam, psi, hold, st, st.dt);
    const StateVector b = propagate_once(fam, psi, hold, st, 0.5 * st.dt);
    check(r, (a - b).norm() < 1e-7, "dt-halving moves the final state by < 1e-7");
    check(r, std::abs(a.norm() - 1.0) < 1e-6, "norm conserved through propagation");
  }
  {  // derivative estimator vs local quadratic fit (1%)
    HamiltonianFamily fam(d, 3);
    const ReferenceBasis rb = make_reference_basis(d, 3);
    SpectrumOptions so;
    so.k = 10;
    const double th = 0.75 * M_PI, h = 1e-3 * M_PI;
    const T2Estimate est = estimate_t2(fam, rb, th, so, 1e-5, h);
    const LabeledSpectrum center = solve_labeled(fam, rb, th, so);
    std::vector<double> xs{-2 * h, -h, 0.0, h, 2 * h}, ys;
    for (double dx : xs) {
      const LabeledSpectrum s =
          dx == 0.0 ? center : solve_labeled(fam, rb, th + dx, so, &center);
      ys.push_back(s.energy(make_label(1, 0, 0, 0)));
    }
    Eigen::MatrixXd X(5, 3);
    Eigen::VectorXd Y(5);
    for (int i = 0; i < 5; ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = xs[i];
      X(i, 2) = xs[i] * xs[i];
      Y(i) = ys[i];
    }
    const Eigen::Vector3d c = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
    check(r, std::abs(est.slope_q1 - c(1)) <= 0.01 * std::abs(c(1)),
          "T2 slope matches a 5-point quadratic fit to 1%");
  }
  return r;
}

}  // namespace

int main() {
  std::cout << "acceptance suite: reference-design regression and properties\n";
  const auto t0 = Clock::now();
  {
    const auto a = Clock::now();
    const CriterionResult r = criterion1();
    report(1, "parameter regression", r,
           std::chrono::duration<double>(Clock::now() - a).count());
  }
  criteria2and3();
  {
    const auto a = Clock::now();
    const CriterionResult r = criterion4();
    report(4, "regime structure of the zero contour", r,
           std::chrono::duration<double>(Clock::now() - a).count());
  }
  {
    const auto a = Clock::now();
    const CriterionResult r = criterion5();
    report(5, "CZ calibration, fidelity, leakage budget", r,
           std::chrono::duration<double>(Clock::now() - a).count());
  }
  {
    const auto a = Clock::now();
    const CriterionResult r = criterion6();
    report(6, "flux-noise T2 estimates (N=7)", r,
           std::chrono::duration<double>(Clock::now() - a).count());
  }
  {
    const auto a = Clock::now();
    const CriterionResult r = criterion7();
    report(7, "single-transmon-coupler contrast", r,
           std::chrono::duration<double>(Clock::now() - a).count());
  }
  {
    const auto a = Clock::now();
    const CriterionResult r = criterion8();
    report(8, "property battery", r,
           std::chrono::duration<double>(Clock::now() - a).count());
  }
  std::cout << "total: "
            << static_cast<int>(std::chrono::duration<double>(Clock::now() - t0).count())
            << " s, " << g_failures << " criterion(s) failed\n";
  return g_failures == 0 ? 0 : 1;
}
