// Scratch numeric check (not built by CMake).
#include <cstdio>

#include "rydpol/blockade.hpp"
#include "rydpol/eit.hpp"
#include "rydpol/optimizer.hpp"
#include "rydpol/units.hpp"
#include "rydpol/visibility.hpp"

using namespace rydpol;

int main() {
    MediumParams m;
    m.gamma_e = units::mhz_to_rad_per_s(6.07);
    m.gamma_rg = units::per_us_to_per_s(1.2);
    m.rho = units::per_cm3_to_per_m3(2.0e12);
    m.d_ge = 2.54e-29;
    m.k_s = two_pi / units::nm_to_m(780.24);
    m.length = units::um_to_m(60.0);
    m.c6 = units::c6_au_to_si(2.3e23);
    m.validate();

    std::printf("chi0      = %.6f\n", chi0(m));
    std::printf("od_max    = %.4f\n", od_max(m));
    std::printf("zeta      = %.5f\n", zeta(m));

    const OperatingPoint p = analytic_optimum(m);
    std::printf("delta_s   = %.4f MHz\n", units::rad_per_s_to_mhz(p.delta_s));
    std::printf("omega_c   = %.4f MHz\n", units::rad_per_s_to_mhz(p.omega_c));
    std::printf("two-ph    = %.4f MHz\n", units::rad_per_s_to_mhz(p.two_photon_detuning()));
    std::printf("im_chi_b  = %.6e\n", p.im_chi_b);
    std::printf("T_pred    = %.4f\n", p.predicted_transmission);

    const BlockadeResult b = conditional_response_bulk(m, p.drive());
    std::printf("r_b       = %.4f um\n", units::m_to_um(b.r_b));
    std::printf("r_b_im    = %.4f um\n", units::m_to_um(b.r_b_im));
    std::printf("od_b      = %.4f\n", b.od_b);
    std::printf("delta_od  = %.3e\n", b.delta_od);
    std::printf("delta_beta= %.6f (pi = %.6f)\n", b.delta_beta, pi);

    // Crossing with the coupling on two-photon resonance at -17 MHz.
    Drive fig4{units::mhz_to_rad_per_s(12.5), units::mhz_to_rad_per_s(-17.0),
               units::mhz_to_rad_per_s(17.0)};
    const CrossingResult cr = crossing_two_photon_detuning(m, fig4);
    std::printf("crossing  = %.4f MHz (two-photon %.4f MHz)\n",
                units::rad_per_s_to_mhz(cr.delta_s), units::rad_per_s_to_mhz(cr.delta_twophoton));

    const BulkPhaseSolution v4 = solve_bulk_phase_for_pi(4.0);
    std::printf("V_t(4)    = %.5f at dbb = %.5f\n", v4.v_t, v4.delta_beta_b);

    const BulkPhaseSolution v1 = solve_bulk_phase_for_pi(1.0);
    std::printf("V_t(1)    = %.5f at dbb = %.5f (2pi = %.5f)\n", v1.v_t, v1.delta_beta_b, two_pi);
    return 0;
}
