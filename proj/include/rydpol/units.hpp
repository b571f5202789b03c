#pragma once

#include "rydpol/constants.hpp"

namespace rydpol::units {

// Frequencies quoted as nu in MHz become angular frequencies omega = 2*pi*nu.
inline constexpr double mhz_to_rad_per_s(double mhz) { return two_pi * 1e6 * mhz; }
inline constexpr double rad_per_s_to_mhz(double w) { return w / (two_pi * 1e6); }

// Rates quoted in 1/us (no 2*pi convention).
inline constexpr double per_us_to_per_s(double r) { return 1e6 * r; }
inline constexpr double per_s_to_per_us(double r) { return 1e-6 * r; }

inline constexpr double um_to_m(double um) { return 1e-6 * um; }
inline constexpr double m_to_um(double m) { return 1e6 * m; }
inline constexpr double nm_to_m(double nm) { return 1e-9 * nm; }
inline constexpr double us_to_s(double us) { return 1e-6 * us; }

inline constexpr double per_cm3_to_per_m3(double n) { return 1e6 * n; }

inline constexpr double c6_au_to_si(double au) { return c6_atomic_unit * au; }

}  // namespace rydpol::units
