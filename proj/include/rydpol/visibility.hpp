#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "rydpol/constants.hpp"
#include "rydpol/errors.hpp"
#include "rydpol/parallel.hpp"

namespace rydpol {

namespace detail {

// (1 - exp(i a d)) / d, series-stabilised near d = 0.
inline std::complex<double> one_minus_exp_over(double a, double d) {
    if (std::abs(a * d) > 1e-5) {
        return (1.0 - std::exp(std::complex<double>(0.0, a * d))) / d;
    }
    const std::complex<double> ia(0.0, a);
    return -ia * (1.0 + ia * d / 2.0 + ia * ia * d * d / 6.0);
}

}  // namespace detail

/// Averaged conditional phasor V_t e^{i beta_4} for a uniform storage
/// distribution, as a function of x = L/r_b and the bulk phase
/// delta_beta_b = k_s r_b Re(chi_b - chi_u). Three branches: storage deep in
/// the medium blocks 2 r_b, near the edges less, and for L < r_b the whole
/// medium is always blocked.
inline std::complex<double> visibility_phasor_complex(double l_over_rb, double delta_beta_b) {
    if (!(l_over_rb > 0.0)) throw ConfigError("l_over_rb must be > 0");
    const double x = l_over_rb;
    const double d = delta_beta_b;
    const std::complex<double> i(0.0, 1.0);
    if (x <= 1.0) {
        return std::exp(i * (d * x / 2.0));
    }
    if (x < 2.0) {
        const std::complex<double> edge = detail::one_minus_exp_over((1.0 - x) / 2.0, d);
        return std::exp(i * (d * x / 2.0)) * (-1.0 + 2.0 / x - (4.0 * i / x) * edge);
    }
    const std::complex<double> edge = detail::one_minus_exp_over(-0.5, d);
    return std::exp(i * d) * (1.0 - 2.0 / x - (4.0 * i / x) * edge);
}

struct VisibilityPoint {
    double l_over_rb = 0.0;
    double delta_beta_b = 0.0;  // bulk conditional phase, rad
    double v_t = 0.0;           // target visibility
    double beta_4 = 0.0;        // averaged conditional phase, (-pi, pi]
};

inline VisibilityPoint visibility_phasor(double l_over_rb, double delta_beta_b) {
    const std::complex<double> v = visibility_phasor_complex(l_over_rb, delta_beta_b);
    VisibilityPoint p;
    p.l_over_rb = l_over_rb;
    p.delta_beta_b = delta_beta_b;
    p.v_t = std::abs(v);
    p.beta_4 = std::arg(v);
    return p;
}

/// Quadrature of the defining average Int |u(z)|^2 e^{i delta_beta(z)} dz for
/// a sampled profile |u|^2 on a uniform z grid over [0, L] (midpoint rule,
/// weights normalised internally). delta_beta(z) follows the step-function
/// blocked length: delta_beta_b * L_b(z) / (2 r_b).
inline std::complex<double> visibility_average_profile(double l_over_rb, double delta_beta_b,
                                                       const std::vector<double>& weight) {
    if (weight.empty()) throw ConfigError("profile must have at least one sample");
    const double x = l_over_rb;  // work in units of r_b = 1, L = x
    const std::complex<double> i(0.0, 1.0);
    std::complex<double> acc(0.0, 0.0);
    double norm = 0.0;
    const std::size_t n = weight.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double z = (k + 0.5) / n * x;
        const double lb = std::min(1.0, z) + std::min(1.0, x - z);
        acc += weight[k] * std::exp(i * (delta_beta_b * lb / 2.0));
        norm += weight[k];
    }
    if (norm <= 0.0) throw ConfigError("profile weights must have positive mass");
    return acc / norm;
}

/// Uniform-|u|^2 averaging mode.
inline std::complex<double> visibility_average_uniform(double l_over_rb, double delta_beta_b,
                                                       std::size_t samples = 10000) {
    return visibility_average_profile(l_over_rb, delta_beta_b,
                                      std::vector<double>(samples, 1.0));
}

namespace detail {

// Continuous (unwrapped) beta_4 along increasing delta_beta_b, anchored at
// phase 0 in the delta_beta_b -> 0 limit.
class UnwrappedPhase {
  public:
    explicit UnwrappedPhase(double l_over_rb) : x_(l_over_rb) {}

    double advance_to(double d) {
        const double raw = std::arg(visibility_phasor_complex(x_, d));
        double diff = raw - prev_raw_;
        while (diff > pi) diff -= two_pi;
        while (diff < -pi) diff += two_pi;
        value_ += diff;
        prev_raw_ = raw;
        return value_;
    }

    double value() const { return value_; }

  private:
    double x_;
    double prev_raw_ = 0.0;
    double value_ = 0.0;
};

}  // namespace detail

struct BulkPhaseSolution {
    double delta_beta_b = 0.0;
    double v_t = 0.0;
};

/// First delta_beta_b in (0, 4 pi] whose averaged phase beta_4 equals pi,
/// tracked along the principal branch with unwrapping. Additional crossings
/// inside the bracket, when present, are appended to `alternates`.
inline BulkPhaseSolution solve_bulk_phase_for_pi(double l_over_rb,
                                                 std::vector<double>* alternates = nullptr) {
    if (!(l_over_rb > 0.0)) throw ConfigError("l_over_rb must be > 0");
    const double d_max = 4.0 * pi;
    const int steps = 8000;
    const double h = d_max / steps;

    detail::UnwrappedPhase phase(l_over_rb);
    double d_lo = 1e-12;
    double phi_lo = phase.advance_to(d_lo);
    double first_root = -1.0;
    for (int k = 1; k <= steps; ++k) {
        const double d_hi = k * h;
        const double phi_hi = phase.advance_to(d_hi);
        if ((phi_lo - pi) * (phi_hi - pi) <= 0.0 && phi_lo != phi_hi) {
            // Bisect with a locally unwrapped phase relative to the low end.
            const double raw_lo = std::arg(visibility_phasor_complex(l_over_rb, d_lo));
            auto phi_local = [&](double d) {
                double diff = std::arg(visibility_phasor_complex(l_over_rb, d)) - raw_lo;
                while (diff > pi) diff -= two_pi;
                while (diff < -pi) diff += two_pi;
                return phi_lo + diff;
            };
            double a = d_lo, b = d_hi;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (a + b);
                if ((phi_local(a) - pi) * (phi_local(mid) - pi) <= 0.0) {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            const double root = 0.5 * (a + b);
            if (first_root < 0.0) {
                first_root = root;
                if (!alternates) break;
            } else if (alternates) {
                alternates->push_back(root);
            }
        }
        d_lo = d_hi;
        phi_lo = phi_hi;
    }
    if (first_root < 0.0) {
        throw NoRoot("beta_4 never reaches pi for delta_beta_b in (0, 4 pi]");
    }
    BulkPhaseSolution sol;
    sol.delta_beta_b = first_root;
    sol.v_t = std::abs(visibility_phasor_complex(l_over_rb, first_root));
    return sol;
}

struct VisibilityCurve {
    std::vector<VisibilityPoint> points;       // beta_4 = pi at each point
    std::vector<double> skipped;               // ratios with no beta_4 = pi root
};

/// V_t versus L/r_b with the conditional phase pinned to pi at every ratio.
inline VisibilityCurve visibility_curve(const std::vector<double>& l_over_rb_grid) {
    VisibilityCurve curve;
    std::vector<VisibilityPoint> pts(l_over_rb_grid.size());
    std::vector<char> ok(l_over_rb_grid.size(), 0);
    parallel_for(l_over_rb_grid.size(), [&](std::size_t i) {
        try {
            const BulkPhaseSolution s = solve_bulk_phase_for_pi(l_over_rb_grid[i]);
            pts[i] = VisibilityPoint{l_over_rb_grid[i], s.delta_beta_b, s.v_t, pi};
            ok[i] = 1;
        } catch (const NoRoot&) {
            ok[i] = 0;
        }
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (ok[i]) {
            curve.points.push_back(pts[i]);
        } else {
            curve.skipped.push_back(l_over_rb_grid[i]);
        }
    }
    return curve;
}

}  // namespace rydpol
