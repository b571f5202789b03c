#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rydpol/random.hpp"
#include "rydpol/visibility.hpp"

using namespace rydpol;

TEST_CASE("fully blocked medium keeps unit visibility") {
    Rng rng(23);
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform(0.05, 1.0);
        const double dbb = rng.uniform(-2.0 * pi, 2.0 * pi);
        const VisibilityPoint p = visibility_phasor(x, dbb);
        CHECK(p.v_t == Catch::Approx(1.0).epsilon(1e-12));
        const double expected = std::remainder(dbb * x / 2.0, two_pi);
        CHECK(std::remainder(p.beta_4 - expected, two_pi) ==
              Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("phasor magnitude never exceeds one") {
    Rng rng(29);
    for (int i = 0; i < 500; ++i) {
        const double x = rng.uniform(0.05, 20.0);
        const double dbb = rng.uniform(-4.0 * pi, 4.0 * pi);
        CHECK(std::abs(visibility_phasor_complex(x, dbb)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("removable singularity at zero bulk phase") {
    for (double x : {0.5, 1.5, 4.0}) {
        CHECK(std::abs(visibility_phasor_complex(x, 1e-13) - 1.0) < 1e-9);
        // The stabilised edge term matches the direct formula at small phase.
        const auto series = visibility_phasor_complex(x, 1e-6);
        const auto direct = visibility_phasor_complex(x, 1e-3);
        CHECK(std::abs(series) <= 1.0 + 1e-12);
        CHECK(std::abs(std::arg(direct)) < 2e-3 * x);
    }
}

TEST_CASE("branches agree at the boundaries") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const double dbb = rng.uniform(0.01, 4.0 * pi);
        for (double boundary : {1.0, 2.0}) {
            const auto below =
                visibility_phasor_complex(std::nextafter(boundary, 0.0), dbb);
            const auto above =
                visibility_phasor_complex(std::nextafter(boundary, 10.0), dbb);
            CHECK(std::abs(below - above) < 1e-9);
        }
    }
}

TEST_CASE("closed form equals the uniform storage average") {
    Rng rng(37);
    for (int i = 0; i < 30; ++i) {
        const double x = rng.uniform(0.2, 10.0);
        const double dbb = rng.uniform(0.05, 2.0 * pi);
        const auto closed = visibility_phasor_complex(x, dbb);
        const auto averaged = visibility_average_uniform(x, dbb, 10000);
        CHECK(std::abs(closed - averaged) < 1e-3);
    }
}

TEST_CASE("point-like storage profile keeps unit visibility") {
    std::vector<double> weight(1001, 0.0);
    weight[500] = 1.0;  // stored exactly at the centre
    const auto avg = visibility_average_profile(4.0, 2.5, weight);
    CHECK(std::abs(avg) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bulk phase solving for an averaged pi shift") {
    SECTION("reference geometry L = 4 r_b") {
        const BulkPhaseSolution s = solve_bulk_phase_for_pi(4.0);
        CHECK(s.v_t == Catch::Approx(0.85).margin(0.02));
        const VisibilityPoint p = visibility_phasor(4.0, s.delta_beta_b);
        CHECK(p.beta_4 == Catch::Approx(pi).margin(1e-6));
    }
    SECTION("fully blocked branch") {
        const BulkPhaseSolution s = solve_bulk_phase_for_pi(1.0);
        CHECK(s.delta_beta_b == Catch::Approx(two_pi).epsilon(1e-6));
        CHECK(s.v_t == Catch::Approx(1.0).epsilon(1e-9));
    }
    SECTION("short medium needs the bracket edge") {
        const BulkPhaseSolution s = solve_bulk_phase_for_pi(0.5);
        CHECK(s.delta_beta_b == Catch::Approx(4.0 * pi).epsilon(1e-6));
        CHECK(s.v_t == Catch::Approx(1.0).epsilon(1e-9));
    }
    SECTION("no root below the bracket") {
        CHECK_THROWS_AS(solve_bulk_phase_for_pi(0.45), NoRoot);
    }
    SECTION("long media recover unit visibility") {
        CHECK(solve_bulk_phase_for_pi(100.0).v_t > 0.97);
        CHECK(solve_bulk_phase_for_pi(100.0).v_t > solve_bulk_phase_for_pi(10.0).v_t);
    }
}

TEST_CASE("visibility curve shape") {
    const VisibilityCurve curve = visibility_curve({0.5, 1.0, 2.0, 4.0, 8.0});
    REQUIRE(curve.points.size() == 5);
    CHECK(curve.skipped.empty());
    for (const auto& p : curve.points) {
        CHECK(p.v_t >= 0.0);
        CHECK(p.v_t <= 1.0 + 1e-12);
    }
    CHECK(curve.points[0].v_t == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(curve.points[1].v_t == Catch::Approx(1.0).epsilon(1e-9));
    // The dip sits between L/r_b = 1 and 4 and recovers beyond.
    CHECK(curve.points[2].v_t < curve.points[1].v_t);
    CHECK(curve.points[2].v_t < curve.points[3].v_t);
    CHECK(curve.points[4].v_t > curve.points[3].v_t);

    SECTION("curve reuses the solver") {
        const BulkPhaseSolution s = solve_bulk_phase_for_pi(4.0);
        CHECK(curve.points[3].delta_beta_b == s.delta_beta_b);
        CHECK(curve.points[3].v_t == s.v_t);
    }
    SECTION("unsolvable ratios are skipped with a record") {
        const VisibilityCurve c = visibility_curve({0.3, 4.0});
        CHECK(c.points.size() == 1);
        REQUIRE(c.skipped.size() == 1);
        CHECK(c.skipped[0] == 0.3);
    }
}

TEST_CASE("first beta_4 = pi crossing is returned, alternates recorded") {
    std::vector<double> alternates;
    const BulkPhaseSolution s = solve_bulk_phase_for_pi(4.0, &alternates);
    for (double alt : alternates) CHECK(alt > s.delta_beta_b);
}
