#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "rydpol/errors.hpp"

namespace rydpol {

/// Bisection on [lo, hi]; requires f(lo) and f(hi) of opposite sign.
/// Converges to rel_tol in the abscissa.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double f_lo, double f_hi, double rel_tol) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((hi - lo) <= rel_tol * std::abs(mid)) return mid;
        const double f_mid = f(mid);
        if (f_mid == 0.0) return mid;
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Expands [guess/2, 2*guess] by powers of 2 until f changes sign across the
/// interval, then bisects. The expansion never leaves [min_x, max_x].
inline double find_root_expanding(const std::function<double(double)>& f, double guess,
                                  double min_x, double max_x, double rel_tol,
                                  const std::string& what) {
    double lo = std::fmax(guess / 2.0, min_x);
    double hi = std::fmin(guess * 2.0, max_x);
    double f_lo = f(lo);
    double f_hi = f(hi);
    while (std::signbit(f_lo) == std::signbit(f_hi) && f_lo != 0.0 && f_hi != 0.0) {
        const bool at_min = lo <= min_x;
        const bool at_max = hi >= max_x;
        if (at_min && at_max) throw NoCrossing(what);
        if (!at_min) {
            lo = std::fmax(lo / 2.0, min_x);
            f_lo = f(lo);
        }
        if (!at_max) {
            hi = std::fmin(hi * 2.0, max_x);
            f_hi = f(hi);
        }
    }
    return bisect(f, lo, hi, f_lo, f_hi, rel_tol);
}

}  // namespace rydpol
