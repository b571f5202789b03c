#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

#include "rydpol/blockade.hpp"
#include "rydpol/constants.hpp"
#include "rydpol/eit.hpp"
#include "rydpol/errors.hpp"
#include "rydpol/parallel.hpp"

namespace rydpol {

/// Feasibility parameter of the simultaneous (delta_beta = pi, delta_OD = 0)
/// operating point: zeta = (2/7) |C6/(hbar gamma_rg)|^{1/7} (3 chi0 k_s / pi)^{6/7}.
inline double zeta(const MediumParams& m) {
    if (m.gamma_rg <= 0.0) return std::numeric_limits<double>::infinity();
    const double a = std::abs(m.c6 / (hbar * m.gamma_rg));
    const double b = 3.0 * chi0(m) * m.k_s / pi;
    return (2.0 / 7.0) * std::pow(a, 1.0 / 7.0) * std::pow(b, 6.0 / 7.0);
}

struct OperatingPoint {
    double delta_s = 0.0;   // rad/s
    double omega_c = 0.0;   // rad/s
    double delta_cu = 0.0;  // rad/s
    double zeta = 0.0;
    double im_chi_b = 0.0;
    double predicted_transmission = 0.0;

    double two_photon_detuning() const { return delta_cu + delta_s; }
    Drive drive() const { return Drive{omega_c, delta_s, delta_cu}; }
};

/// Closed-form minimiser of Im(chi_b) under delta_beta = pi and
/// delta_OD = 0 (bulk convention L_b = 2 r_b):
///   Delta_s   = (Gamma_e/2)(zeta + sqrt(zeta^2-1)) sgn(-C6)
///   |Omega_c|^2 = 6 gamma_rg (4 Delta_s^2 + Gamma_e^2) / Gamma_e
///   Delta_cu  from the delta_OD = 0 constraint.
inline OperatingPoint analytic_optimum(const MediumParams& m) {
    const double z = zeta(m);
    if (!(z >= 1.0) || !std::isfinite(z)) {
        throw Infeasible("zeta < 1: delta_beta = pi and delta_OD = 0 cannot both be met");
    }
    OperatingPoint p;
    p.zeta = z;
    const double sign = m.c6 > 0.0 ? -1.0 : 1.0;
    p.delta_s = 0.5 * m.gamma_e * (z + std::sqrt(z * z - 1.0)) * sign;
    p.omega_c = std::sqrt(6.0 * m.gamma_rg *
                          (4.0 * p.delta_s * p.delta_s + m.gamma_e * m.gamma_e) / m.gamma_e);
    p.delta_cu = -p.delta_s + zero_delta_od_two_photon_detuning(m, p.delta_s, p.omega_c);
    p.im_chi_b = chi0(m) * m.gamma_e / (4.0 * z * std::abs(p.delta_s));
    p.predicted_transmission = std::exp(-m.k_s * m.length * p.im_chi_b);
    return p;
}

struct GridSpec {
    int n_delta = 200;
    int n_omega = 200;
    // |Delta_s| window in units of Gamma_e, log-spaced; sign fixed by C6.
    double delta_lo = 0.5;
    double delta_hi = 10.0;
    // Omega_c window in units of Gamma_e, log-spaced.
    double omega_lo = 0.05;
    double omega_hi = 5.0;
    double beta_tol = 0.02;  // |delta_beta - pi| acceptance band, rad
};

namespace detail {

// Qualifying points of one Delta_s row. Im(chi_b) is constant along a row,
// so every qualifying point of the winning row ties on the objective; the
// row is represented by the grid point nearest the (log) center of its
// qualifying Omega_c range, which is the tangency of the delta_beta = pi
// constraint. Rows are reduced by argmin on Im(chi_b) with lexicographic
// (delta_s, omega_c) tie-breaking, so parallel and serial runs agree
// bit-for-bit.
struct GridRowResult {
    double im_chi_b = std::numeric_limits<double>::infinity();
    double delta_s = 0.0;
    double omega_lo = 0.0;
    double omega_hi = 0.0;
    bool found = false;

    double representative_omega() const { return std::sqrt(omega_lo * omega_hi); }

    bool better_than(const GridRowResult& o) const {
        if (!o.found) return found;
        if (!found) return false;
        return std::tie(im_chi_b, delta_s, omega_lo) <
               std::tie(o.im_chi_b, o.delta_s, o.omega_lo);
    }
};

}  // namespace detail

/// Independent grid oracle for analytic_optimum: the delta_OD = 0 constraint
/// is eliminated through the closed-form Delta_cu, delta_beta = pi is checked
/// per grid point with the bulk convention, and Im(chi_b) is minimised over
/// the qualifying points.
inline OperatingPoint brute_force_optimum(const MediumParams& m, const GridSpec& grid = {}) {
    const double sign = m.c6 > 0.0 ? -1.0 : 1.0;
    const double ge = m.gamma_e;
    std::vector<detail::GridRowResult> rows(grid.n_delta);

    const double log_dlo = std::log(grid.delta_lo);
    const double log_dhi = std::log(grid.delta_hi);
    const double log_olo = std::log(grid.omega_lo);
    const double log_ohi = std::log(grid.omega_hi);
    const auto omega_at = [&](int j) {
        const double fo = grid.n_omega > 1 ? static_cast<double>(j) / (grid.n_omega - 1) : 0.0;
        return ge * std::exp(log_olo + fo * (log_ohi - log_olo));
    };

    parallel_for(grid.n_delta, [&](std::size_t i) {
        const double fd = grid.n_delta > 1 ? static_cast<double>(i) / (grid.n_delta - 1) : 0.0;
        const double delta_s = sign * ge * std::exp(log_dlo + fd * (log_dhi - log_dlo));
        const double im_b = susceptibility_two_level(m, delta_s).value.imag();
        detail::GridRowResult row;
        for (int j = 0; j < grid.n_omega; ++j) {
            const double omega = omega_at(j);
            const double delta_cu =
                -delta_s + zero_delta_od_two_photon_detuning(m, delta_s, omega);
            const Drive d{omega, delta_s, delta_cu};
            double delta_beta = 0.0;
            try {
                const double r_b = blockade_radius_re(m, d);
                const complexd cu = susceptibility(m, d).value;
                const complexd cb = chi_blocked(m, d).value;
                delta_beta = m.k_s * r_b * (cb.real() - cu.real());
            } catch (const NoCrossing&) {
                continue;
            }
            if (std::abs(delta_beta - pi) > grid.beta_tol) continue;
            if (!row.found) {
                row = detail::GridRowResult{im_b, delta_s, omega, omega, true};
            } else {
                row.omega_lo = std::min(row.omega_lo, omega);
                row.omega_hi = std::max(row.omega_hi, omega);
            }
        }
        rows[i] = row;
    });

    detail::GridRowResult best;
    for (const auto& row : rows) {
        if (row.better_than(best)) best = row;
    }
    if (!best.found) {
        throw Infeasible("no grid point satisfies |delta_beta - pi| <= tolerance");
    }
    // Snap the row center back onto the grid.
    const double target = best.representative_omega();
    double omega_star = best.omega_lo;
    double dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.n_omega; ++j) {
        const double omega = omega_at(j);
        const double d = std::abs(std::log(omega / target));
        if (d < dist) {
            dist = d;
            omega_star = omega;
        }
    }
    OperatingPoint p;
    p.zeta = zeta(m);
    p.delta_s = best.delta_s;
    p.omega_c = omega_star;
    p.delta_cu = -best.delta_s + zero_delta_od_two_photon_detuning(m, best.delta_s, omega_star);
    p.im_chi_b = best.im_chi_b;
    p.predicted_transmission = std::exp(-m.k_s * m.length * p.im_chi_b);
    return p;
}

/// Scalar multiplier on the density that makes the bulk conditional phase at
/// the operating point equal pi exactly (the atom-number/length fine tune).
inline double fine_tune_density_multiplier(const MediumParams& m, const OperatingPoint& p) {
    const BlockadeResult r = conditional_response_bulk(m, p.drive());
    if (r.delta_beta == 0.0) throw Infeasible("conditional phase vanishes; cannot rescale to pi");
    return pi / r.delta_beta;
}

struct PhaseBound {
    bool feasible = false;        // od_b >= 2 pi, needed for |delta_beta| = pi
    double max_delta_beta = 0.0;  // od_b / 2
    // Transmission ceilings when the bound is saturated with delta_beta = pi:
    double t_ceiling = 0.0;          // exp(-od_b/2), any geometry with L_b <= L
    double t_ceiling_l_eq_4rb = 0.0; // exp(-od_b), geometry with L = 2 L_b
};

/// Necessary condition from |Re chi| <= chi0/2: |delta_beta| <= od_b/2.
inline PhaseBound necessary_condition_bound(double od_b) {
    if (od_b < 0.0) throw ConfigError("od_b must be >= 0");
    PhaseBound b;
    b.max_delta_beta = od_b / 2.0;
    b.feasible = od_b >= two_pi;
    b.t_ceiling = std::exp(-od_b / 2.0);
    b.t_ceiling_l_eq_4rb = std::exp(-od_b);
    return b;
}

/// Drive that saturates |delta_beta| = od_b/2 (requires gamma_rg = 0):
/// |Delta_s| = Gamma_e/2 and two-photon detuning Omega_c^2/(8 Delta_s).
inline Drive tight_bound_drive(const MediumParams& m, double omega_c) {
    const double sign = m.c6 > 0.0 ? -1.0 : 1.0;
    const double delta_s = sign * m.gamma_e / 2.0;
    const double delta_tp = omega_c * omega_c / (8.0 * delta_s);
    return Drive{omega_c, delta_s, -delta_s + delta_tp};
}

struct ImChiExpansion {
    double leading = 0.0;   // chi0 / (4 zeta^2)
    double exact = 0.0;     // chi0 Gamma_e / (4 zeta |Delta_s|) at the optimum
    double expanded = 0.0;  // fully expanded leading term in medium constants
};

/// Large-zeta expansion of the optimal Im(chi_b).
inline ImChiExpansion im_chi_b_expansion(const MediumParams& m) {
    const double z = zeta(m);
    if (!(z > 1.0)) throw Infeasible("expansion requires zeta > 1");
    ImChiExpansion e;
    const double x0 = chi0(m);
    e.leading = x0 / (4.0 * z * z);
    e.exact = analytic_optimum(m).im_chi_b;
    e.expanded = 49.0 / 16.0 * std::pow(pi / (3.0 * m.k_s), 12.0 / 7.0) *
                 std::pow(hbar * m.gamma_rg / std::abs(m.c6), 2.0 / 7.0) *
                 std::pow(1.0 / x0, 5.0 / 7.0);
    return e;
}

}  // namespace rydpol
