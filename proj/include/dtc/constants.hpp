#pragma once

#include <cmath>

namespace dtc {

// SI values, 2019 redefinition: the elementary charge is exact, hbar is exact.
namespace constants {
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double hbar = 1.054571817e-34;               // J s
inline constexpr double reduced_flux_quantum = hbar / (2.0 * elementary_charge);  // Wb
inline constexpr double flux_quantum = 2.0 * M_PI * reduced_flux_quantum;         // Wb
// e^2 / (2 hbar): converts an inverse capacitance (1/F) to an angular charging
// frequency (rad/s).
inline constexpr double charging_rate =
    elementary_charge * elementary_charge / (2.0 * hbar);
}  // namespace constants

// Internal representation is angular frequency (rad/s), capacitance in F,
// time in s. All I/O is GHz (value / 2pi), fF, ns, and flux as Theta_ex/pi.
namespace units {
inline constexpr double twopi = 2.0 * M_PI;
inline constexpr double femto_farad = 1e-15;
inline constexpr double nanosecond = 1e-9;

inline constexpr double ghz_to_rad(double f_ghz) { return twopi * 1e9 * f_ghz; }
inline constexpr double rad_to_ghz(double w) { return w / (twopi * 1e9); }
inline constexpr double mhz_to_rad(double f_mhz) { return twopi * 1e6 * f_mhz; }
inline constexpr double rad_to_mhz(double w) { return w / (twopi * 1e6); }
}  // namespace units

}  // namespace dtc
