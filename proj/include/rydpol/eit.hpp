#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "rydpol/constants.hpp"
#include "rydpol/errors.hpp"

namespace rydpol {

using complexd = std::complex<double>;

/// Atomic and optical constants of the 1D homogeneous medium. All angular
/// frequencies are stored in rad/s, rates in 1/s, lengths in m.
struct MediumParams {
    double gamma_e = 0.0;   // population decay rate of |e>, rad/s
    double gamma_rg = 0.0;  // |g>-|r> dephasing rate, 1/s
    double rho = 0.0;       // atomic number density, 1/m^3
    double d_ge = 0.0;      // signal-transition dipole moment, C m
    double k_s = 0.0;       // signal vacuum wavenumber, 1/m
    double length = 0.0;    // medium length L, m
    double c6 = 0.0;        // van der Waals coefficient, J m^6

    // Fitting workflows may pin chi0 directly instead of deriving it from
    // rho and d_ge.
    std::optional<double> chi0_override;

    void validate() const {
        if (!(gamma_e > 0.0)) throw ConfigError("gamma_e must be > 0");
        if (!(gamma_rg >= 0.0)) throw ConfigError("gamma_rg must be >= 0");
        if (!(k_s > 0.0)) throw ConfigError("k_s must be > 0");
        if (!(length > 0.0)) throw ConfigError("length must be > 0");
        if (c6 == 0.0) throw ConfigError("c6 must be nonzero");
        if (!chi0_override) {
            if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
            if (!(d_ge > 0.0)) throw ConfigError("d_ge must be > 0");
        } else if (!(*chi0_override > 0.0)) {
            throw ConfigError("chi0 override must be > 0");
        }
    }

    MediumParams with_chi0_scaled(double factor) const {
        MediumParams m = *this;
        if (m.chi0_override) {
            *m.chi0_override *= factor;
        } else {
            m.rho *= factor;
        }
        return m;
    }
};

/// One EIT operating point: coupling Rabi frequency and the two
/// single-photon detunings, all in rad/s.
struct Drive {
    double omega_c = 0.0;  // coupling Rabi frequency magnitude, >= 0
    double delta_s = 0.0;  // signal detuning, signed
    double delta_c = 0.0;  // coupling detuning, signed

    double two_photon_detuning() const { return delta_c + delta_s; }
};

struct Susceptibility {
    complexd value;
};

/// Peak resonant susceptibility chi0 = 2 rho |d_ge|^2 / (eps0 hbar Gamma_e).
inline double chi0(const MediumParams& m) {
    if (m.chi0_override) return *m.chi0_override;
    return 2.0 * m.rho * m.d_ge * m.d_ge / (eps0 * hbar * m.gamma_e);
}

inline double od_max(const MediumParams& m) { return m.k_s * m.length * chi0(m); }

/// Linear susceptibility of the ladder EIT system,
///   chi = i chi0 Gamma_e / (Gamma_e - 2i Delta_s + |Omega_c|^2 / (gamma_rg - 2i delta)),
/// with delta = Delta_c + Delta_s. The coupling term is singular for
/// gamma_rg = 0 on two-photon resonance; that point is the exact dark state
/// and evaluates to chi = 0.
inline Susceptibility susceptibility(const MediumParams& m, const Drive& d) {
    const double delta = d.two_photon_detuning();
    if (d.omega_c > 0.0 && m.gamma_rg == 0.0 && delta == 0.0) {
        return {complexd(0.0, 0.0)};
    }
    complexd denom(m.gamma_e, -2.0 * d.delta_s);
    if (d.omega_c > 0.0) {
        denom += d.omega_c * d.omega_c / complexd(m.gamma_rg, -2.0 * delta);
    }
    return {complexd(0.0, 1.0) * chi0(m) * m.gamma_e / denom};
}

/// Two-level response of the bare signal transition (coupling light off).
inline Susceptibility susceptibility_two_level(const MediumParams& m, double delta_s) {
    return susceptibility(m, Drive{0.0, delta_s, 0.0});
}

struct Propagation {
    double od = 0.0;            // optical depth k_s L Im(chi)
    double beta = 0.0;          // phase shift k_s L Re(chi)/2, rad
    double transmission = 1.0;  // exp(-od)
};

inline Propagation propagate(const MediumParams& m, const Susceptibility& chi) {
    Propagation p;
    p.od = m.k_s * m.length * chi.value.imag();
    p.beta = m.k_s * m.length * chi.value.real() / 2.0;
    p.transmission = std::exp(-p.od);
    return p;
}

}  // namespace rydpol
