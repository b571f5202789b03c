#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "rydpol/constants.hpp"
#include "rydpol/errors.hpp"

namespace rydpol {

/// splitmix64, used to derive independent substream seeds from one user seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
    return splitmix64(s);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        return (engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Knuth's product method; all rates in this model are O(1).
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    /// Index in [0, n) with probabilities proportional to weights.
    template <std::size_t N>
    std::size_t categorical(const std::array<double, N>& weights, double total) {
        double u = uniform() * total;
        for (std::size_t i = 0; i + 1 < N; ++i) {
            if (u < weights[i]) return i;
            u -= weights[i];
        }
        return N - 1;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

/// I1(kappa)/I0(kappa): the visibility of a von Mises distribution with
/// concentration kappa.
inline double von_mises_visibility(double kappa) {
    if (kappa <= 0.0) return 0.0;
    if (kappa < 500.0) {
        return std::cyl_bessel_i(1.0, kappa) / std::cyl_bessel_i(0.0, kappa);
    }
    const double k = kappa;
    return 1.0 - 1.0 / (2.0 * k) - 1.0 / (8.0 * k * k) - 1.0 / (8.0 * k * k * k);
}

/// Concentration that yields the requested visibility, by bisection.
/// v = 1 is the fluctuation-free limit kappa = infinity.
inline double von_mises_kappa_for_visibility(double v) {
    if (v < 0.0 || v > 1.0) throw ConfigError("visibility must lie in [0, 1]");
    if (v == 1.0) return std::numeric_limits<double>::infinity();
    if (v == 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (von_mises_visibility(hi) < v) {
        hi *= 2.0;
        if (hi > 1e9) break;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (von_mises_visibility(mid) < v) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Best-Fisher rejection sampler for the von Mises distribution.
inline double sample_von_mises(Rng& rng, double mean, double kappa) {
    if (!std::isfinite(kappa)) return mean;
    if (kappa <= 0.0) return mean + rng.uniform(-pi, pi);
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    for (;;) {
        const double u1 = rng.uniform();
        const double z = std::cos(pi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        const double u2 = rng.uniform();
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double u3 = rng.uniform();
            return mean + (u3 > 0.5 ? 1.0 : -1.0) * std::acos(std::clamp(f, -1.0, 1.0));
        }
    }
}

}  // namespace rydpol
