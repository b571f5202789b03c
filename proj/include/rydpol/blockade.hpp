#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "rydpol/constants.hpp"
#include "rydpol/eit.hpp"
#include "rydpol/errors.hpp"
#include "rydpol/rootfind.hpp"

namespace rydpol {

// Radii are searched inside this window.
inline constexpr double blockade_r_min = 1e-9;  // 1 nm
inline constexpr double blockade_r_max = 1e-3;  // 1 mm

/// Susceptibility seen by the polariton at distance r from the stored
/// excitation: the van der Waals energy V(r) = -C6/r^6 shifts the coupling
/// detuning to Delta_c(r) = Delta_cu + C6/(hbar r^6).
inline Susceptibility chi_at_distance(const MediumParams& m, const Drive& drive_u, double r) {
    Drive d = drive_u;
    const double r3 = r * r * r;
    d.delta_c = drive_u.delta_c + m.c6 / (hbar * r3 * r3);
    return susceptibility(m, d);
}

/// Fully blocked value chi_b = lim_{r->0} chi(r): the two-level response.
inline Susceptibility chi_blocked(const MediumParams& m, const Drive& drive_u) {
    return susceptibility_two_level(m, drive_u.delta_s);
}

/// Closed-form radius |4 C6 Delta_s / (hbar Omega_c^2)|^{1/6}, exact for
/// gamma_rg = 0, |Delta_s| >> Gamma_e, Delta_cu + Delta_s = 0. Used as the
/// root-search seed everywhere.
inline double analytic_blockade_radius(const MediumParams& m, const Drive& d) {
    if (d.omega_c <= 0.0 || d.delta_s == 0.0) return 0.0;
    const double x = std::abs(4.0 * m.c6 * d.delta_s / (hbar * d.omega_c * d.omega_c));
    return std::pow(x, 1.0 / 6.0);
}

inline constexpr double rb_over_rbi_analytic_ratio = 1.1582922063259876;  // (1+sqrt(2))^{1/6}

struct BlockadeRadii {
    double r_b = 0.0;     // real-part radius, m
    double r_b_im = 0.0;  // imaginary-part radius, m
};

namespace detail {

/// Crossing of part(chi(r)) with the mean of its two limits. Fast path:
/// power-of-2 bracket expansion around the analytic seed. When the limits
/// nearly coincide (the tails carry no sign information, e.g. the Im channel
/// on the delta_OD = 0 curve) a log-grid march locates the crossing of the
/// structured region instead, picking the most significant sign change.
template <typename Part>
double find_blockade_radius(const MediumParams& m, const Drive& drive_u, Part part, double seed,
                            double rel_tol, const char* what) {
    const double vb = part(chi_blocked(m, drive_u).value);
    const double vu = part(susceptibility(m, drive_u).value);
    const double mid = 0.5 * (vb + vu);
    const auto g = [&](double r) { return part(chi_at_distance(m, drive_u, r).value) - mid; };

    const double contrast = std::abs(vb - vu);
    if (contrast > 1e-9 * chi0(m)) {
        try {
            return find_root_expanding(g, seed, blockade_r_min, blockade_r_max, rel_tol, what);
        } catch (const NoCrossing&) {
            // fall through to the marching scan
        }
    }

    constexpr int per_decade = 80;
    const int n = static_cast<int>(per_decade * std::log10(blockade_r_max / blockade_r_min));
    const double step = std::pow(blockade_r_max / blockade_r_min, 1.0 / n);
    double best_mag = 1e-13 * chi0(m);
    double best_lo = 0.0, best_hi = 0.0, best_f_lo = 0.0, best_f_hi = 0.0;
    double r_lo = blockade_r_min;
    double f_lo = g(r_lo);
    for (int i = 1; i <= n; ++i) {
        const double r_hi = blockade_r_min * std::pow(step, i);
        const double f_hi = g(r_hi);
        if (std::signbit(f_lo) != std::signbit(f_hi)) {
            const double mag = std::max(std::abs(f_lo), std::abs(f_hi));
            if (mag > best_mag) {
                best_mag = mag;
                best_lo = r_lo;
                best_hi = r_hi;
                best_f_lo = f_lo;
                best_f_hi = f_hi;
            }
        }
        r_lo = r_hi;
        f_lo = f_hi;
    }
    if (best_hi == 0.0) throw NoCrossing(what);
    return bisect(g, best_lo, best_hi, best_f_lo, best_f_hi, rel_tol);
}

}  // namespace detail

/// Real-part blockade radius only (the conditional-phase channel).
inline double blockade_radius_re(const MediumParams& m, const Drive& drive_u,
                                 double rel_tol = 1e-4) {
    double seed = analytic_blockade_radius(m, drive_u);
    if (!(seed > blockade_r_min && seed < blockade_r_max)) {
        seed = std::sqrt(blockade_r_min * blockade_r_max);
    }
    return detail::find_blockade_radius(
        m, drive_u, [](const complexd& c) { return c.real(); }, seed, rel_tol,
        "no Re-chi crossing in [1 nm, 1 mm]");
}

/// Solves Re[chi(r_b)] = (Re chi_b + Re chi_u)/2 and the Im analog. On the
/// delta_OD = 0 curve the Im contrast vanishes and no midpoint crossing
/// exists; the Im radius then drops out of every observable (delta_OD = 0
/// for any blocked length) and is reported as the Re radius.
inline BlockadeRadii blockade_radius(const MediumParams& m, const Drive& drive_u,
                                     double rel_tol = 1e-4) {
    double seed = analytic_blockade_radius(m, drive_u);
    if (!(seed > blockade_r_min && seed < blockade_r_max)) {
        seed = std::sqrt(blockade_r_min * blockade_r_max);
    }
    BlockadeRadii radii;
    radii.r_b = detail::find_blockade_radius(
        m, drive_u, [](const complexd& c) { return c.real(); }, seed, rel_tol,
        "no Re-chi crossing in [1 nm, 1 mm]");
    const double im_contrast = std::abs(chi_blocked(m, drive_u).value.imag() -
                                        susceptibility(m, drive_u).value.imag());
    if (im_contrast <= 1e-9 * chi0(m)) {
        radii.r_b_im = radii.r_b;
    } else {
        radii.r_b_im = detail::find_blockade_radius(
            m, drive_u, [](const complexd& c) { return c.imag(); },
            seed / rb_over_rbi_analytic_ratio, rel_tol, "no Im-chi crossing in [1 nm, 1 mm]");
    }
    return radii;
}

/// Conditional response in the step-function approximation.
struct BlockadeResult {
    double r_b = 0.0;
    double r_b_im = 0.0;
    complexd chi_u;
    complexd chi_b;
    double z_s = 0.0;        // storage position, m
    double l_b = 0.0;        // blocked length for Re, m
    double l_b_im = 0.0;     // blocked length for Im, m
    double delta_od = 0.0;   // k_s L_bi Im(chi_b - chi_u)
    double delta_beta = 0.0; // k_s L_b Re(chi_b - chi_u)/2, rad
    double od_b = 0.0;       // blocked optical depth k_s L_b chi0
};

inline double blocked_length(double r_b, double z_s, double length) {
    return std::min(r_b, z_s) + std::min(r_b, length - z_s);
}

/// Step-function conditional response for a control excitation stored at z_s.
inline BlockadeResult conditional_response(const MediumParams& m, const Drive& drive_u,
                                           double z_s) {
    if (z_s < 0.0 || z_s > m.length) throw ConfigError("z_s must lie in [0, L]");
    const BlockadeRadii radii = blockade_radius(m, drive_u);
    BlockadeResult res;
    res.r_b = radii.r_b;
    res.r_b_im = radii.r_b_im;
    res.chi_u = susceptibility(m, drive_u).value;
    res.chi_b = chi_blocked(m, drive_u).value;
    res.z_s = z_s;
    res.l_b = blocked_length(radii.r_b, z_s, m.length);
    res.l_b_im = blocked_length(radii.r_b_im, z_s, m.length);
    res.delta_od = m.k_s * res.l_b_im * (res.chi_b.imag() - res.chi_u.imag());
    res.delta_beta = m.k_s * res.l_b * (res.chi_b.real() - res.chi_u.real()) / 2.0;
    res.od_b = m.k_s * res.l_b * chi0(m);
    return res;
}

/// Same, but with the bulk convention L_b = 2 r_b independent of L and z_s.
inline BlockadeResult conditional_response_bulk(const MediumParams& m, const Drive& drive_u) {
    const BlockadeRadii radii = blockade_radius(m, drive_u);
    BlockadeResult res;
    res.r_b = radii.r_b;
    res.r_b_im = radii.r_b_im;
    res.chi_u = susceptibility(m, drive_u).value;
    res.chi_b = chi_blocked(m, drive_u).value;
    res.z_s = 0.5 * m.length;
    res.l_b = 2.0 * radii.r_b;
    res.l_b_im = 2.0 * radii.r_b_im;
    res.delta_od = m.k_s * res.l_b_im * (res.chi_b.imag() - res.chi_u.imag());
    res.delta_beta = m.k_s * res.l_b * (res.chi_b.real() - res.chi_u.real()) / 2.0;
    res.od_b = m.k_s * res.l_b * chi0(m);
    return res;
}

/// Conditional phase without the step approximation:
/// (k_s/2) Int_0^L Re[chi(|z - z_s|) - chi_u] dz by composite Simpson.
inline double delta_beta_exact_integral(const MediumParams& m, const Drive& drive_u, double z_s,
                                        int intervals = 8192) {
    const double re_u = susceptibility(m, drive_u).value.real();
    const auto f = [&](double z) {
        const double r = std::abs(z - z_s);
        if (r < blockade_r_min) return chi_blocked(m, drive_u).value.real() - re_u;
        return chi_at_distance(m, drive_u, r).value.real() - re_u;
    };
    if (intervals % 2) ++intervals;
    const double h = m.length / intervals;
    double sum = f(0.0) + f(m.length);
    for (int i = 1; i < intervals; ++i) sum += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return m.k_s / 2.0 * sum * h / 3.0;
}

struct CrossingResult {
    double delta_s = 0.0;         // signal detuning of the crossing, rad/s
    double delta_twophoton = 0.0; // implied two-photon detuning Delta_c + Delta_s, rad/s
};

/// The conditional-OD zeroing procedure: with the coupling detuning held at
/// the template value, scan Delta_s away from the two-photon resonance until
/// the EIT and two-level absorption curves cross (Im chi_u = Im chi_b).
/// Returns the crossing and the off-resonance two-photon detuning to tune to.
inline CrossingResult crossing_two_photon_detuning(const MediumParams& m,
                                                   const Drive& drive_template) {
    if (drive_template.omega_c <= 0.0) {
        throw NoCrossing("coupling off: EIT and two-level curves are identical");
    }
    const auto h = [&](double delta_s) {
        const Drive d{drive_template.omega_c, delta_s, drive_template.delta_c};
        return susceptibility(m, d).value.imag() -
               susceptibility_two_level(m, delta_s).value.imag();
    };
    // Start on the two-photon resonance and march away from the bare
    // resonance (the side where the conditional phase is useful).
    const double start = -drive_template.delta_c;
    double direction = start != 0.0 ? (start > 0.0 ? 1.0 : -1.0)
                                    : (m.c6 > 0.0 ? -1.0 : 1.0);
    const double step = direction * m.gamma_e / 50.0;
    double lo = start;
    double f_lo = h(lo);
    const int max_steps = 500 * 10;  // 10 Gamma_e span
    for (int i = 1; i <= max_steps; ++i) {
        const double hi = start + i * step;
        const double f_hi = h(hi);
        if (f_lo == 0.0) return {lo, drive_template.delta_c + lo};
        if (std::signbit(f_lo) != std::signbit(f_hi) || f_hi == 0.0) {
            const auto g = [&](double x) { return h(x); };
            double a = lo, b = hi, fa = f_lo, fb = f_hi;
            if (a > b) { std::swap(a, b); std::swap(fa, fb); }
            const double root = bisect(g, a, b, fa, fb, 1e-9);
            return {root, drive_template.delta_c + root};
        }
        lo = hi;
        f_lo = f_hi;
    }
    throw NoCrossing("EIT and two-level transmission curves do not cross in the scan window");
}

/// Closed-form two-photon detuning that zeroes the conditional optical depth
/// at fixed Delta_s (the analytic counterpart of the scan above).
inline double zero_delta_od_two_photon_detuning(const MediumParams& m, double delta_s,
                                                double omega_c) {
    const double ge = m.gamma_e;
    const double o2 = omega_c * omega_c;
    return (o2 * ge + m.gamma_rg * (ge * ge - 4.0 * delta_s * delta_s)) / (8.0 * ge * delta_s);
}

}  // namespace rydpol
