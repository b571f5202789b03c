#pragma once

namespace rydpol {

// CODATA 2018 values, SI.
inline constexpr double eps0 = 8.8541878128e-12;  // vacuum permittivity, F/m
inline constexpr double hbar = 1.054571817e-34;   // reduced Planck constant, J s
inline constexpr double c_light = 299792458.0;    // vacuum speed of light, m/s

// One atomic unit of the van der Waals coefficient C6, in J m^6.
inline constexpr double c6_atomic_unit = 9.573e-80;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace rydpol
