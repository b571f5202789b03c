#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rydpol/eit.hpp"
#include "rydpol/random.hpp"
#include "rydpol/units.hpp"
#include "test_helpers.hpp"

using namespace rydpol;
using rydpol::test::reference_medium;

TEST_CASE("chi0 reproduces the reference optical depths") {
    MediumParams m = reference_medium();
    CHECK(od_max(m) == Catch::Approx(35.0).margin(1.0));

    m.rho = units::per_cm3_to_per_m3(2.4e12);
    CHECK(od_max(m) == Catch::Approx(40.0).margin(3.0));
}

TEST_CASE("chi0 vanishes with the density") {
    MediumParams m = reference_medium();
    m.rho *= 1e-12;
    CHECK(chi0(m) < 1e-12);
}

TEST_CASE("chi0 override replaces the density route") {
    MediumParams m = reference_medium();
    m.chi0_override = 0.05;
    CHECK(chi0(m) == 0.05);
    CHECK(od_max(m) == Catch::Approx(0.05 * m.k_s * m.length));
}

TEST_CASE("resonant two-level limit is i chi0") {
    const MediumParams m = reference_medium();
    const complexd chi = susceptibility(m, Drive{0.0, 0.0, 0.0}).value;
    CHECK(chi.real() == Catch::Approx(0.0).margin(1e-15));
    CHECK(chi.imag() == Catch::Approx(chi0(m)).epsilon(1e-12));
}

TEST_CASE("perfect EIT transparency on the dark resonance") {
    MediumParams m = reference_medium();
    m.gamma_rg = 0.0;
    const double ds = units::mhz_to_rad_per_s(-3.0);
    const complexd chi = susceptibility(m, Drive{m.gamma_e, ds, -ds}).value;
    CHECK(chi == complexd(0.0, 0.0));
}

TEST_CASE("coupling-off limit is continuous") {
    const MediumParams m = reference_medium();
    const double ds = units::mhz_to_rad_per_s(-4.0);
    const double dc = units::mhz_to_rad_per_s(5.0);
    const complexd off = susceptibility(m, Drive{0.0, ds, dc}).value;
    const complexd tiny = susceptibility(m, Drive{1e-3, ds, dc}).value;
    CHECK(std::abs(tiny - off) <= 1e-10 * std::abs(off));
    CHECK(off == susceptibility_two_level(m, ds).value);
}

TEST_CASE("two-level spectrum symmetry in the detuning") {
    const MediumParams m = reference_medium();
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const double ds = rng.uniform(0.1, 10.0) * m.gamma_e;
        const complexd plus = susceptibility_two_level(m, ds).value;
        const complexd minus = susceptibility_two_level(m, -ds).value;
        CHECK(plus.real() == Catch::Approx(-minus.real()).epsilon(1e-12));
        CHECK(plus.imag() == Catch::Approx(minus.imag()).epsilon(1e-12));
    }
}

TEST_CASE("passivity and susceptibility bounds over random drives") {
    const MediumParams m = reference_medium();
    const double x0 = chi0(m);
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        Drive d;
        d.omega_c = rng.uniform(0.0, 5.0) * m.gamma_e;
        d.delta_s = rng.uniform(-10.0, 10.0) * m.gamma_e;
        d.delta_c = rng.uniform(-10.0, 10.0) * m.gamma_e;
        MediumParams mi = m;
        mi.gamma_rg = rng.uniform(0.0, 2e6);
        const complexd chi = susceptibility(mi, d).value;
        CHECK(chi.imag() >= -1e-18);
        CHECK(std::abs(chi) <= x0 * (1.0 + 1e-12));
        CHECK(std::abs(chi.real()) <= x0 / 2.0 * (1.0 + 1e-12));
    }
}

TEST_CASE("propagation map") {
    const MediumParams m = reference_medium();
    SECTION("resonant two-level") {
        const Propagation p = propagate(m, Susceptibility{complexd(0.0, chi0(m))});
        CHECK(p.od == Catch::Approx(od_max(m)));
        CHECK(p.beta == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("vacuum") {
        const Propagation p = propagate(m, Susceptibility{complexd(0.0, 0.0)});
        CHECK(p.od == 0.0);
        CHECK(p.beta == 0.0);
        CHECK(p.transmission == 1.0);
    }
}

TEST_CASE("od and beta are invariant under consistent unit rescalings") {
    const MediumParams m = reference_medium();
    const Drive d{1.5 * m.gamma_e, -2.0 * m.gamma_e, 2.2 * m.gamma_e};
    const Propagation base = propagate(m, susceptibility(m, d));

    // chi0 is unchanged when density and dipole moment trade off.
    MediumParams scaled = m;
    scaled.rho *= 4.0;
    scaled.d_ge /= 2.0;
    CHECK(chi0(scaled) == Catch::Approx(chi0(m)).epsilon(1e-12));

    // od and beta depend on k_s L only through the product.
    scaled = m;
    scaled.k_s *= 3.0;
    scaled.length /= 3.0;
    const Propagation p = propagate(scaled, susceptibility(scaled, d));
    CHECK(p.od == Catch::Approx(base.od).epsilon(1e-12));
    CHECK(p.beta == Catch::Approx(base.beta).epsilon(1e-12));
}

TEST_CASE("medium validation rejects unphysical inputs") {
    MediumParams m = reference_medium();
    m.length = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = reference_medium();
    m.c6 = 0.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = reference_medium();
    m.rho = -1.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
}
