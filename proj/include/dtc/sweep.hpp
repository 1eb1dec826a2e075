#pragma once

#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <sstream>
#include <vector>

#include "dtc/spectrum.hpp"

namespace dtc {

struct SweepFailure {
  double theta_ex = 0.0;
  double omega4 = 0.0;
  std::string message;
};

// zeta_ZZ(theta_ex, omega4) table. Rows follow omega4_grid; when omega4_grid
// is empty the sweep is a single row at the base design frequency.
struct ZZSweep {
  std::vector<double> theta_grid;   // rad
  std::vector<double> omega4_grid;  // rad/s; empty for a single-row sweep
  std::vector<std::vector<double>> zeta;  // [row][theta index], rad/s; NaN on failure
  std::vector<SweepFailure> failures;

  // retained spectra of the last computed row (single-row sweeps only)
  std::vector<LabeledSpectrum> row_spectra;
};

// One row: label continuation along theta (sequential), seeded from the
// uncoupled products at the first grid point. On a labeling conflict the
// point is marked failed and continuation reseeds at the next point.
inline std::vector<LabeledSpectrum> sweep_row(const HamiltonianFamily& family,
                                              const ReferenceBasis& rb,
                                              const std::vector<double>& theta_grid,
                                              const SpectrumOptions& opts,
                                              std::vector<SweepFailure>* failures,
                                              double omega4_for_report = 0.0) {
  std::vector<LabeledSpectrum> out;
  out.reserve(theta_grid.size());
  const LabeledSpectrum* prev = nullptr;
  for (double th : theta_grid) {
    try {
      out.push_back(solve_labeled(family, rb, th, opts, prev));
      prev = &out.back();
    } catch (const Error& e) {
      if (failures) failures->push_back({th, omega4_for_report, e.what()});
      out.push_back(LabeledSpectrum{});
      out.back().theta_ex = th;
      out.back().zeta_zz = std::numeric_limits<double>::quiet_NaN();
      prev = nullptr;  // reseed from products at the next point
    }
  }
  return out;
}

inline ZZSweep sweep_zz(const CircuitParams& base, const std::vector<double>& theta_grid,
                        const std::vector<double>& omega4_grid, int N,
                        const SpectrumOptions& opts, int workers = 1,
                        bool retain_spectra = false) {
  for (std::size_t i = 1; i < theta_grid.size(); ++i)
    if (!(theta_grid[i] > theta_grid[i - 1])) throw ConfigError("theta grid must be increasing");
  for (std::size_t i = 1; i < omega4_grid.size(); ++i)
    if (!(omega4_grid[i] > omega4_grid[i - 1])) throw ConfigError("omega4 grid must be increasing");

  ZZSweep sweep;
  sweep.theta_grid = theta_grid;
  sweep.omega4_grid = omega4_grid;
  const std::size_t nrows = omega4_grid.empty() ? 1 : omega4_grid.size();
  sweep.zeta.assign(nrows, {});

  auto run_row = [&](std::size_t r) {
    CircuitParams p = base;
    const double w4 = omega4_grid.empty() ? base.omega_design(3) : omega4_grid[r];
    p.omega_design(3) = w4;
    const DerivedParams d = derive_all(p);
    HamiltonianFamily family(d, N);
    const ReferenceBasis rb =
        make_reference_basis(d, N, opts.ref_levels_per_mode, opts.ref_total_excitation);
    std::vector<SweepFailure> fails;
    std::vector<LabeledSpectrum> row = sweep_row(family, rb, theta_grid, opts, &fails, w4);
    std::vector<double> zrow(theta_grid.size());
    for (std::size_t i = 0; i < row.size(); ++i) zrow[i] = row[i].zeta_zz;
    return std::tuple(std::move(zrow), std::move(fails), std::move(row));
  };

  // rows are independent; continuation serializes only within a row
  std::size_t next = 0;
  while (next < nrows) {
    const std::size_t batch = std::min<std::size_t>(std::max(workers, 1), nrows - next);
    std::vector<std::future<decltype(run_row(0))>> futs;
    for (std::size_t b = 0; b < batch; ++b)
      futs.push_back(std::async(std::launch::async, run_row, next + b));
    for (std::size_t b = 0; b < batch; ++b) {
      auto [zrow, fails, row] = futs[b].get();
      sweep.zeta[next + b] = std::move(zrow);
      sweep.failures.insert(sweep.failures.end(), fails.begin(), fails.end());
      if (retain_spectra && nrows == 1) sweep.row_spectra = std::move(row);
    }
    next += batch;
  }
  return sweep;
}

struct ZeroFindResult {
  std::vector<double> roots;  // rad, ascending
  bool degenerate_row = false;  // the whole row is zero within tolerance
};

// Bisection refinement of every sign change of f on the sampled row.
// Terminates a root when |f| < f_tol or the bracket is below x_tol.
inline ZeroFindResult find_zeros_on_row(const std::function<double(double)>& f,
                                        const std::vector<double>& grid,
                                        const std::vector<double>& values, double f_tol,
                                        double x_tol = 1e-12) {
  if (grid.size() != values.size() || grid.size() < 2)
    throw DimensionError("find_zeros_on_row: bad row");
  ZeroFindResult out;
  bool all_zero = true;
  for (double v : values)
    if (!(std::abs(v) < f_tol)) all_zero = false;
  if (all_zero) {
    out.degenerate_row = true;
    return out;
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double a = grid[i], b = grid[i + 1];
    double fa = values[i], fb = values[i + 1];
    if (std::isnan(fa) || std::isnan(fb)) continue;
    if (fa == 0.0 && std::abs(fa) < f_tol) {
      out.roots.push_back(a);
      continue;
    }
    if (fa * fb > 0.0) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = f(mid);
      if (std::abs(fm) < f_tol || (b - a) < x_tol) {
        a = b = mid;
        break;
      }
      if (fa * fm <= 0.0) {
        b = mid;
        fb = fm;
      } else {
        a = mid;
        fa = fm;
      }
    }
    out.roots.push_back(0.5 * (a + b));
  }
  std::sort(out.roots.begin(), out.roots.end());
  return out;
}

// Zero crossings of zeta_ZZ along theta at fixed omega4. Every refinement
// re-solves the spectrum; labels at probe points are seeded directly from
// uncoupled products, which is reliable near the decoupling flux where the
// zeros live.
inline ZeroFindResult find_zz_zeros(const CircuitParams& base, double omega4,
                                    const std::vector<double>& theta_grid,
                                    const std::vector<double>& zeta_row, int N,
                                    const SpectrumOptions& opts,
                                    double zeta_tol = units::mhz_to_rad(1e-3)) {
  CircuitParams p = base;
  p.omega_design(3) = omega4;
  const DerivedParams d = derive_all(p);
  HamiltonianFamily family(d, N);
  const ReferenceBasis rb =
      make_reference_basis(d, N, opts.ref_levels_per_mode, opts.ref_total_excitation);
  auto f = [&](double th) { return solve_labeled(family, rb, th, opts).zeta_zz; };
  return find_zeros_on_row(f, theta_grid, zeta_row, zeta_tol);
}

}  // namespace dtc
