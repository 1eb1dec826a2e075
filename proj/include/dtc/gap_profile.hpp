#pragma once

#include <cmath>
#include <vector>

#include "dtc/interp.hpp"
#include "dtc/spectrum.hpp"
#include "dtc/sweep.hpp"

namespace dtc {

// Avoided-crossing profile of the (01|00) <-> (00|10) pair along theta_ex.
// omega_gap is the labeled level difference (always >= 2g up to numerical
// tolerance); delta is the signed two-level detuning with
// omega_gap = sqrt(delta^2 + 4 g^2). Sign convention: delta < 0 before the
// gap minimum and > 0 after, so the mixing angle theta_mix = atan2(2g, delta)
// falls monotonically from just below pi toward 0 as theta_ex approaches pi.
// Only the monotonicity is load-bearing; the pulse construction is invariant
// under theta_mix -> pi - theta_mix.
struct GapProfile {
  std::vector<double> theta;      // rad
  std::vector<double> omega_gap;  // rad/s
  std::vector<double> delta;      // rad/s, signed
  std::vector<double> theta_mix;  // rad, in (0, pi), strictly decreasing
  std::vector<double> omega_map;  // rad/s, gap used for the s -> t map
  double g = 0.0;                 // rad/s, half the minimum gap
  double theta_ex_g = 0.0;        // rad, flux where the raw gap reaches 2g
};

// Sign assignment and mixing angle from a tabulated gap curve.
inline void assign_detuning_and_mixing(GapProfile& gp) {
  std::size_t imin = 0;
  for (std::size_t i = 1; i < gp.omega_gap.size(); ++i)
    if (gp.omega_gap[i] < gp.omega_gap[imin]) imin = i;
  const double g2 = gp.omega_gap[imin];
  gp.g = 0.5 * g2;
  gp.theta_ex_g = gp.theta[imin];
  gp.delta.resize(gp.theta.size());
  gp.theta_mix.resize(gp.theta.size());
  for (std::size_t i = 0; i < gp.theta.size(); ++i) {
    const double d2 = gp.omega_gap[i] * gp.omega_gap[i] - g2 * g2;
    double del = std::sqrt(std::max(d2, 0.0));
    if (i < imin) del = -del;
    gp.delta[i] = del;
    gp.theta_mix[i] = std::atan2(g2, del);
  }
  // strictness for inversion; the physical profile is already monotone
  for (std::size_t i = 1; i < gp.theta_mix.size(); ++i) {
    if (gp.theta_mix[i] >= gp.theta_mix[i - 1])
      gp.theta_mix[i] = std::nextafter(gp.theta_mix[i - 1], 0.0);
  }
}

// Build a profile from an arbitrary tabulated gap curve (no spectra).
inline GapProfile gap_profile_from_curve(std::vector<double> theta,
                                         std::vector<double> omega_gap) {
  if (theta.size() != omega_gap.size() || theta.size() < 5)
    throw DimensionError("gap profile needs >= 5 matching points");
  GapProfile gp;
  gp.theta = std::move(theta);
  gp.omega_gap = std::move(omega_gap);
  assign_detuning_and_mixing(gp);
  gp.omega_map = gp.omega_gap;
  return gp;
}

inline GapProfile extract_gap_profile(const std::vector<LabeledSpectrum>& sweep) {
  if (sweep.size() < 5) throw DimensionError("gap profile needs >= 5 sweep points");
  GapProfile gp;
  const Label upper = make_label(0, 0, 1, 0), lower = make_label(0, 1, 0, 0);
  for (const auto& s : sweep) {
    gp.theta.push_back(s.theta_ex);
    gp.omega_gap.push_back(s.energy(upper) - s.energy(lower));
  }
  std::size_t imin = 0;
  for (std::size_t i = 1; i < gp.omega_gap.size(); ++i)
    if (gp.omega_gap[i] < gp.omega_gap[imin]) imin = i;
  const double g2 = gp.omega_gap[imin];
  if (!(g2 > 0.0)) throw LabelingError("gap profile: nonpositive labeled gap at the minimum");

  // reject a second, disconnected minimum within tolerance
  const double uniq_tol = 1e-6 * g2;
  for (std::size_t i = 0; i < gp.omega_gap.size(); ++i) {
    const bool at_min = gp.omega_gap[i] < g2 + uniq_tol;
    const bool adjacent =
        std::llabs(static_cast<long long>(i) - static_cast<long long>(imin)) <= 1;
    if (at_min && !adjacent)
      throw ConvergenceError("gap profile: minimum is not unique within tolerance");
  }

  assign_detuning_and_mixing(gp);
  gp.omega_map = gp.omega_gap;
  return gp;
}

// Computes the profile from scratch on a uniform grid (label continuation
// along the grid).
inline GapProfile extract_gap_profile(const CircuitParams& params, int N, double theta_lo,
                                      double theta_hi, int npts, const SpectrumOptions& opts) {
  const DerivedParams d = derive_all(params);
  HamiltonianFamily family(d, N);
  const ReferenceBasis rb =
      make_reference_basis(d, N, opts.ref_levels_per_mode, opts.ref_total_excitation);
  std::vector<SweepFailure> fails;
  const std::vector<LabeledSpectrum> sweep =
      sweep_row(family, rb, linspace(theta_lo, theta_hi, npts), opts, &fails);
  if (!fails.empty())
    throw LabelingError("gap profile sweep had labeling failures: " + fails.front().message);
  return extract_gap_profile(sweep);
}

// Replace the time-map gap: compressed toward 2g before theta_ex_g, constant
// 2g after. Both branches equal 2g at theta_ex_g.
inline GapProfile modified_gap(const GapProfile& in, double scale = 0.2) {
  GapProfile gp = in;
  const double g2 = 2.0 * gp.g;
  for (std::size_t i = 0; i < gp.theta.size(); ++i)
    gp.omega_map[i] = gp.theta[i] <= gp.theta_ex_g ? scale * (gp.omega_gap[i] - g2) + g2 : g2;
  return gp;
}

}  // namespace dtc
