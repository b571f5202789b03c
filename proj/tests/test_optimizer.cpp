#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rydpol/blockade.hpp"
#include "rydpol/optimizer.hpp"
#include "rydpol/random.hpp"
#include "rydpol/units.hpp"
#include "test_helpers.hpp"

using namespace rydpol;
using rydpol::test::reference_medium;

TEST_CASE("zeta value and scaling laws") {
    const MediumParams m = reference_medium();
    CHECK(zeta(m) == Catch::Approx(2.6).margin(0.1));

    SECTION("monotone decrease in the dephasing rate") {
        MediumParams hi = m;
        hi.gamma_rg *= 1e6;
        CHECK(zeta(hi) < 0.4);
    }
    SECTION("scaling C6 by 2^7 doubles zeta") {
        MediumParams big = m;
        big.c6 *= 128.0;
        CHECK(zeta(big) == Catch::Approx(2.0 * zeta(m)).epsilon(1e-12));
    }
}

TEST_CASE("analytic optimum reproduces the reference operating point") {
    const MediumParams m = reference_medium();
    const OperatingPoint p = analytic_optimum(m);
    CHECK(units::rad_per_s_to_mhz(p.delta_s) == Catch::Approx(-15.0).epsilon(0.05));
    CHECK(units::rad_per_s_to_mhz(p.omega_c) == Catch::Approx(13.0).epsilon(0.05));
    CHECK(units::rad_per_s_to_mhz(p.two_photon_detuning()) ==
          Catch::Approx(-1.3).epsilon(0.05));
    CHECK(p.predicted_transmission == Catch::Approx(0.26).margin(0.02));
    // The closed form equals the two-level response at the optimal detuning.
    CHECK(p.im_chi_b ==
          Catch::Approx(susceptibility_two_level(m, p.delta_s).value.imag()).epsilon(1e-10));
    // The detuning opposes the interaction sign.
    CHECK(p.delta_s * m.c6 < 0.0);
    CHECK(p.zeta >= 1.0);
}

TEST_CASE("infeasible media are rejected by both routes") {
    MediumParams m = reference_medium();
    m.gamma_rg *= 2000.0;  // zeta well below 1
    REQUIRE(zeta(m) < 1.0);
    CHECK_THROWS_AS(analytic_optimum(m), Infeasible);
    CHECK_THROWS_AS(brute_force_optimum(m, GridSpec{40, 40}), Infeasible);
}

TEST_CASE("feasibility boundary") {
    MediumParams m = reference_medium();
    // zeta scales as gamma_rg^(-1/7); move it to exactly 1.
    m.gamma_rg *= std::pow(zeta(m), 7.0);
    REQUIRE(zeta(m) == Catch::Approx(1.0).epsilon(1e-9));
    const OperatingPoint p = analytic_optimum(m);
    CHECK(std::abs(p.delta_s) == Catch::Approx(m.gamma_e / 2.0).epsilon(1e-6));
}

TEST_CASE("optimum satisfies both constraints") {
    const MediumParams m = reference_medium();
    const OperatingPoint p = analytic_optimum(m);
    const BlockadeResult r = conditional_response_bulk(m, p.drive());
    CHECK(std::abs(r.delta_od) <= 1e-6 * od_max(m));

    const double mult = fine_tune_density_multiplier(m, p);
    CHECK(mult == Catch::Approx(1.0).margin(0.01));
    const MediumParams tuned = m.with_chi0_scaled(mult);
    const BlockadeResult rt = conditional_response_bulk(tuned, p.drive());
    CHECK(std::abs(rt.delta_beta - pi) <= 1e-3);
    CHECK(std::abs(rt.delta_od) <= 1e-6 * od_max(tuned));
}

TEST_CASE("local optimality under coupling perturbations") {
    const MediumParams m = reference_medium();
    const OperatingPoint p = analytic_optimum(m);
    for (double factor : {0.9, 1.1}) {
        Drive d = p.drive();
        d.omega_c = p.omega_c * factor;
        d.delta_c = -p.delta_s + zero_delta_od_two_photon_detuning(m, p.delta_s, d.omega_c);
        const BlockadeResult r = conditional_response_bulk(m, d);
        // Rescale the density to restore delta_beta = pi; Im(chi_b) grows
        // with it, so the perturbed point can never beat the optimum.
        const double mult = pi / r.delta_beta;
        CHECK(mult * susceptibility_two_level(m, p.delta_s).value.imag() >=
              p.im_chi_b * (1.0 - 1e-9));
    }
}

TEST_CASE("grid oracle matches the closed form on the reference medium") {
    const MediumParams m = reference_medium();
    const OperatingPoint a = analytic_optimum(m);
    const OperatingPoint g = brute_force_optimum(m);
    CHECK(std::abs(g.delta_s - a.delta_s) <= 0.03 * std::abs(a.delta_s));
    CHECK(std::abs(g.omega_c - a.omega_c) <= 0.03 * a.omega_c);
}

TEST_CASE("optimal absorption is monotone in C6 and gamma_rg") {
    Rng rng(13);
    for (int i = 0; i < 20; ++i) {
        MediumParams m = reference_medium();
        m.gamma_rg = rng.uniform(3e5, 3e6);
        m.c6 = units::c6_au_to_si(rng.uniform(5e22, 8e23));
        if (zeta(m) < 1.05) continue;
        const double base = analytic_optimum(m).im_chi_b;

        MediumParams stronger = m;
        stronger.c6 *= 1.3;
        CHECK(analytic_optimum(stronger).im_chi_b <= base * (1.0 + 1e-12));

        MediumParams noisier = m;
        noisier.gamma_rg *= 1.3;
        if (zeta(noisier) >= 1.0) {
            CHECK(analytic_optimum(noisier).im_chi_b >= base * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("necessary condition for a pi phase shift") {
    SECTION("boundary") {
        const PhaseBound b = necessary_condition_bound(two_pi);
        CHECK(b.feasible);
        CHECK(b.max_delta_beta == Catch::Approx(pi));
    }
    SECTION("reference blocked depth") {
        const PhaseBound b = necessary_condition_bound(19.0);
        CHECK(b.max_delta_beta == Catch::Approx(9.5));
        CHECK(b.feasible);
    }
    SECTION("empty medium") {
        const PhaseBound b = necessary_condition_bound(0.0);
        CHECK(b.max_delta_beta == 0.0);
        CHECK_FALSE(b.feasible);
    }
    SECTION("transmission ceilings at the saturated bound") {
        const PhaseBound b = necessary_condition_bound(two_pi);
        CHECK(b.t_ceiling == Catch::Approx(std::exp(-pi)).epsilon(1e-12));
        CHECK(b.t_ceiling == Catch::Approx(0.04).margin(0.005));
        CHECK(b.t_ceiling_l_eq_4rb == Catch::Approx(std::exp(-two_pi)).epsilon(1e-12));
        CHECK(b.t_ceiling_l_eq_4rb == Catch::Approx(2e-3).margin(5e-4));
    }
}

TEST_CASE("tight-bound drive saturates the phase bound") {
    MediumParams m = reference_medium();
    m.gamma_rg = 0.0;
    const Drive d = tight_bound_drive(m, 1.5 * m.gamma_e);
    const complexd cu = susceptibility(m, d).value;
    const complexd cb = chi_blocked(m, d).value;
    const double x0 = chi0(m);
    CHECK(cu.imag() == Catch::Approx(x0 / 2.0).epsilon(1e-9));
    CHECK(cb.imag() == Catch::Approx(x0 / 2.0).epsilon(1e-9));
    CHECK(std::abs(cu.real()) == Catch::Approx(x0 / 2.0).epsilon(1e-9));
    // delta_beta / od_b reaches its maximum 1/2.
    CHECK((cb.real() - cu.real()) / 2.0 == Catch::Approx(x0 / 2.0).epsilon(1e-9));
}

TEST_CASE("large-zeta expansion of the optimal absorption") {
    const MediumParams m = reference_medium();
    const ImChiExpansion e = im_chi_b_expansion(m);
    const double z = zeta(m);
    CHECK(std::abs(e.leading - e.exact) / e.exact <= 1.2 / (z * z));

    SECTION("the two algebraic forms of the leading term are identical") {
        Rng rng(17);
        for (int i = 0; i < 50; ++i) {
            MediumParams mi = reference_medium();
            mi.gamma_rg = rng.uniform(2e5, 3e6);
            mi.c6 = units::c6_au_to_si(rng.uniform(3e22, 9e23));
            mi.rho *= rng.uniform(0.5, 2.0);
            if (zeta(mi) <= 1.01) continue;
            const ImChiExpansion ei = im_chi_b_expansion(mi);
            CHECK(std::abs(ei.leading - ei.expanded) <= 1e-10 * ei.leading);
        }
    }
    SECTION("vanishing dephasing gives perfect transmission") {
        MediumParams quiet = m;
        quiet.gamma_rg /= 1e4;
        CHECK(analytic_optimum(quiet).im_chi_b < e.exact / 10.0);
    }
}
