#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "dtc/gap_profile.hpp"
#include "dtc/interp.hpp"

namespace dtc {

namespace detail {

// theta(s) shape normalized to u = s/s_f in [0,1]: 0 at the endpoints,
// 1 at the midpoint, flat slope at both ends.
inline double pulse_shape(double u, double A) {
  return (std::cos(2.0 * M_PI * u) - 1.0 + 0.5 * A * (std::cos(4.0 * M_PI * u) - 1.0)) / -2.0;
}

inline double pulse_shape_deriv(double u, double A) {
  return M_PI * (std::sin(2.0 * M_PI * u) + A * std::sin(4.0 * M_PI * u));
}

struct PulseEvaluator {
  PchipInterpolant theta_of_mix;  // theta_mix -> Theta_ex (built on ascending mix)
  PchipInterpolant u_of_t;        // t -> u
  std::vector<double> u_grid, omega_grid;  // map gap sampled on the u grid
  double theta0 = 0.0, theta1 = 0.0, A = 0.0, s_f = 0.0, T_g = 0.0;

  double mix_at_u(double u) const { return theta0 + (theta1 - theta0) * pulse_shape(u, A); }

  double theta_at(double t) const {
    if (t <= 0.0 || t >= T_g) return theta_of_mix(theta0);
    return theta_of_mix(mix_at_u(u_of_t(t)));
  }

  double theta_dot_at(double t) const {
    if (t <= 0.0 || t >= T_g) return 0.0;
    const double u = u_of_t(t);
    const double mix = mix_at_u(u);
    const double dTheta_dmix = theta_of_mix.derivative(mix);
    const double dmix_du = (theta1 - theta0) * pulse_shape_deriv(u, A);
    // du/dt = omega_map(u) / s_f
    std::size_t i = static_cast<std::size_t>(u * (u_grid.size() - 1));
    i = std::min(i, u_grid.size() - 2);
    const double w = omega_grid[i] + (omega_grid[i + 1] - omega_grid[i]) *
                                         (u - u_grid[i]) / (u_grid[i + 1] - u_grid[i]);
    return dTheta_dmix * dmix_du * w / s_f;
  }
};

}  // namespace detail

// Sampled flux pulse with analytic evaluators. Rise from theta(0) to
// Theta_ex = pi at T_g/2, symmetric fall back; endpoint slopes vanish.
struct PulseSchedule {
  double T_g = 0.0;     // s
  double A = -0.17;     // shape coefficient
  double s_f = 0.0;     // total dimensionless phase
  double theta0 = 0.0;  // mixing angle at the endpoints
  double theta1 = 0.0;  // mixing angle at the midpoint
  std::vector<double> t;          // s, uniform
  std::vector<double> theta;      // rad
  std::vector<double> theta_dot;  // rad/s
  std::function<double(double)> theta_fn;      // Theta_ex(t)
  std::function<double(double)> theta_dot_fn;  // dTheta_ex/dt(t)

  double theta_at(double time) const { return theta_fn ? theta_fn(time) : theta.front(); }
  double theta_dot_at(double time) const { return theta_dot_fn ? theta_dot_fn(time) : 0.0; }
};

struct PulseDesignOptions {
  double A = -0.17;
  int quadrature_points = 20001;  // u grid for the s -> t map
  int samples = 2001;             // emitted uniform-t samples
  double s_f = 0.0;               // optional; consistency-checked against T_g
};

// Build the flux pulse from a gap profile: theta(s) interpolates the mixing
// angle between its endpoint values, s maps to t through the profile's map
// gap, and the tabulated profile inverts theta_mix -> Theta_ex.
inline PulseSchedule design_pulse(const GapProfile& profile, double T_g,
                                  const PulseDesignOptions& opts = {}) {
  if (!(T_g >= 0.0)) throw ConfigError("design_pulse: T_g must be >= 0");
  const std::size_t np = profile.theta_mix.size();
  for (std::size_t i = 1; i < np; ++i)
    if (!(profile.theta_mix[i] < profile.theta_mix[i - 1])) {
      std::ostringstream os;
      os << "design_pulse: theta_mix not monotone-invertible near theta_ex="
         << profile.theta[i];
      throw ConvergenceError(os.str());
    }

  auto ev = std::make_shared<detail::PulseEvaluator>();
  {
    // pchip wants ascending abscissae; theta_mix falls along the profile
    std::vector<double> mix_r(profile.theta_mix.rbegin(), profile.theta_mix.rend());
    std::vector<double> th_r(profile.theta.rbegin(), profile.theta.rend());
    ev->theta_of_mix = PchipInterpolant(std::move(mix_r), std::move(th_r));
  }
  ev->theta0 = profile.theta_mix.front();
  ev->theta1 = profile.theta_mix.back();
  ev->A = opts.A;

  PchipInterpolant map_gap(profile.theta, profile.omega_map);
  const int nq = std::max(opts.quadrature_points, 101);
  ev->u_grid = linspace(0.0, 1.0, nq);
  ev->omega_grid.resize(nq);
  std::vector<double> inv_w(nq);
  for (int i = 0; i < nq; ++i) {
    const double mix = ev->mix_at_u(ev->u_grid[i]);
    const double w = map_gap(ev->theta_of_mix(mix));
    if (!(w > 0.0)) throw ConvergenceError("design_pulse: map gap must be positive");
    ev->omega_grid[i] = w;
    inv_w[i] = 1.0 / w;
  }
  const std::vector<double> tu = cumulative_trapezoid(ev->u_grid, inv_w);
  const double C = tu.back();  // T_g = s_f * C
  ev->s_f = T_g / C;
  if (opts.s_f > 0.0 && T_g > 0.0) {
    if (std::abs(opts.s_f - ev->s_f) > 1e-6 * std::abs(ev->s_f))
      throw ConfigError("design_pulse: prescribed s_f inconsistent with T_g");
  }
  ev->T_g = T_g;

  PulseSchedule ps;
  ps.T_g = T_g;
  ps.A = opts.A;
  ps.s_f = ev->s_f;
  ps.theta0 = ev->theta0;
  ps.theta1 = ev->theta1;

  if (T_g > 0.0) {
    std::vector<double> t_of_u(nq);
    for (int i = 0; i < nq; ++i) t_of_u[i] = ev->s_f * tu[i];
    t_of_u.back() = T_g;  // exact endpoint
    for (int i = 1; i < nq; ++i)
      if (t_of_u[i] <= t_of_u[i - 1])
        t_of_u[i] = std::nextafter(t_of_u[i - 1], std::numeric_limits<double>::max());
    ev->u_of_t = PchipInterpolant(t_of_u, ev->u_grid);
    const int ns = std::max(opts.samples, 3);
    ps.t = linspace(0.0, T_g, ns);
    ps.theta.resize(ns);
    ps.theta_dot.resize(ns);
    for (int i = 0; i < ns; ++i) {
      ps.theta[i] = ev->theta_at(ps.t[i]);
      ps.theta_dot[i] = ev->theta_dot_at(ps.t[i]);
    }
  } else {
    ps.t = {0.0};
    ps.theta = {ev->theta_of_mix(ev->theta0)};
    ps.theta_dot = {0.0};
  }
  ps.theta_fn = [ev](double time) { return ev->theta_at(time); };
  ps.theta_dot_fn = [ev](double time) { return ev->theta_dot_at(time); };
  return ps;
}

// Constant-flux hold (no drive), useful for idle-evolution checks.
inline PulseSchedule constant_hold(double theta_ex, double T) {
  PulseSchedule ps;
  ps.T_g = T;
  ps.A = 0.0;
  ps.s_f = 0.0;
  ps.t = {0.0, T};
  ps.theta = {theta_ex, theta_ex};
  ps.theta_dot = {0.0, 0.0};
  ps.theta_fn = [theta_ex](double) { return theta_ex; };
  ps.theta_dot_fn = [](double) { return 0.0; };
  return ps;
}

// P_e = (1/4) | int_0^{s_f} (dtheta/ds) e^{-i s} ds |^2 for an arbitrary
// slope profile given as dtheta/du with u = s/s_f.
inline double nonadiabatic_error_from_slope(const std::function<double(double)>& dtheta_du,
                                            double s_f, int quadrature_points = 200001) {
  const int n = std::max(quadrature_points, 3);
  const double du = 1.0 / (n - 1);
  double acc_re = 0.0, acc_im = 0.0;
  double prev_re = 0.0, prev_im = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = i * du;
    const double d = dtheta_du(u);
    const double re = d * std::cos(s_f * u);
    const double im = -d * std::sin(s_f * u);
    if (i > 0) {
      acc_re += 0.5 * (re + prev_re) * du;
      acc_im += 0.5 * (im + prev_im) * du;
    }
    prev_re = re;
    prev_im = im;
  }
  return 0.25 * std::norm(std::complex<double>(acc_re, acc_im));
}

// Nonadiabatic transition probability of the scheduled pulse shape.
inline double estimate_nonadiabatic_error(const PulseSchedule& schedule,
                                          int quadrature_points = 200001) {
  const double span = schedule.theta1 - schedule.theta0;
  const double A = schedule.A;
  return nonadiabatic_error_from_slope(
      [span, A](double u) { return span * detail::pulse_shape_deriv(u, A); }, schedule.s_f,
      quadrature_points);
}

inline double estimate_nonadiabatic_error(const PulseSchedule& schedule,
                                          const GapProfile& profile,
                                          int quadrature_points = 200001) {
  if (std::abs(schedule.theta0 - profile.theta_mix.front()) > 1e-9 ||
      std::abs(schedule.theta1 - profile.theta_mix.back()) > 1e-9)
    throw ConfigError("estimate_nonadiabatic_error: schedule does not match profile");
  return estimate_nonadiabatic_error(schedule, quadrature_points);
}

}  // namespace dtc
