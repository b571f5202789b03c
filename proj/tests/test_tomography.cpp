#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rydpol/gate.hpp"
#include "rydpol/random.hpp"
#include "rydpol/tomography.hpp"

using namespace rydpol;

namespace {

Matrix4cd random_density(Rng& rng) {
    Matrix4cd g;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double u1 = std::max(rng.uniform(), 1e-300);
            const double u2 = rng.uniform();
            g(i, j) = complexd(std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2),
                               std::sqrt(-2.0 * std::log(u1)) * std::sin(two_pi * u2));
        }
    }
    Matrix4cd rho = g * g.adjoint();
    return rho / rho.trace().real();
}

std::vector<CountRecord> exact_records(const Matrix4cd& rho, double scale = 1.0) {
    std::vector<CountRecord> recs;
    for (const auto& [b1, b2] : all_settings()) {
        CountRecord r;
        r.basis_q1 = b1;
        r.basis_q2 = b2;
        r.counts = born_probabilities(rho, b1, b2);
        for (auto& c : r.counts) c *= scale;
        r.shots = scale;
        recs.push_back(r);
    }
    return recs;
}

EfficiencyBudget reference_budget() {
    EfficiencyBudget b;
    b.eta_r = 0.10;
    b.eta_l = 0.03;
    b.t_r = 0.77;
    b.t_l = 0.15;
    b.detector_qe = 0.5;
    b.n_c = 0.33;
    b.n_t = 0.50;
    b.path_transmission_control = 0.10;
    b.path_transmission_target = 0.10;
    return b;
}

}  // namespace

TEST_CASE("born probabilities are normalised per setting") {
    Rng rng(71);
    const Matrix4cd rho = random_density(rng);
    for (const auto& [b1, b2] : all_settings()) {
        const auto p = born_probabilities(rho, b1, b2);
        CHECK(p[0] + p[1] + p[2] + p[3] == Catch::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("linear inversion round trip on random states") {
    Rng rng(73);
    for (int i = 0; i < 20; ++i) {
        const Matrix4cd rho = random_density(rng);
        const DensityMatrix4 rec = reconstruct_linear(exact_records(rho, 1e4));
        CHECK((rec.rho - rho).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("uniform counts reconstruct the maximally mixed state") {
    std::vector<CountRecord> recs;
    for (const auto& [b1, b2] : all_settings()) {
        CountRecord r;
        r.basis_q1 = b1;
        r.basis_q2 = b2;
        r.counts = {25.0, 25.0, 25.0, 25.0};
        r.shots = 100.0;
        recs.push_back(r);
    }
    const DensityMatrix4 rec = reconstruct_linear(recs);
    CHECK((rec.rho - Matrix4cd::Identity() / 4.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reconstruction input validation") {
    Rng rng(79);
    const Matrix4cd rho = random_density(rng);
    auto recs = exact_records(rho);
    SECTION("a missing setting is rejected") {
        recs.pop_back();
        CHECK_THROWS_AS(reconstruct_linear(recs), MissingSetting);
    }
    SECTION("an empty setting is rejected") {
        recs[4].counts = {0.0, 0.0, 0.0, 0.0};
        CHECK_THROWS_AS(reconstruct_linear(recs), ZeroCoincidences);
    }
}

TEST_CASE("estimator flavors") {
    Rng rng(83);
    const Matrix4cd rho = random_density(rng);
    DensityMatrix4 raw = reconstruct_linear(exact_records(rho));
    SECTION("hermitized flavor preserves the diagonal") {
        const DensityMatrix4 h = raw.hermitized();
        CHECK(h.flavor == EstimatorFlavor::hermitized);
        for (int i = 0; i < 4; ++i)
            CHECK(h.rho(i, i).real() == Catch::Approx(raw.rho(i, i).real()).epsilon(1e-12));
    }
    SECTION("trace-normalized flavor has unit trace") {
        DensityMatrix4 scaled = raw;
        scaled.rho *= 3.0;
        CHECK(scaled.trace_normalized().rho.trace().real() == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("negative eigenvalues are flagged, never clipped") {
        // Sampling noise on a pure state routinely produces a slightly
        // negative eigenvalue under raw linear inversion.
        std::vector<CountRecord> recs;
        Rng noisy(101);
        const Matrix4cd pure = psi_ideal() * psi_ideal().adjoint();
        for (const auto& [b1, b2] : all_settings()) {
            CountRecord r;
            r.basis_q1 = b1;
            r.basis_q2 = b2;
            const auto p = born_probabilities(pure, b1, b2);
            r.shots = 200.0;
            for (int k = 0; k < 200; ++k) r.counts[noisy.categorical(p, 1.0)] += 1.0;
            recs.push_back(r);
        }
        const DensityMatrix4 rec = reconstruct_linear(recs);
        if (rec.has_negative_eigenvalue) {
            CHECK(rec.min_eigenvalue < 0.0);
            Eigen::SelfAdjointEigenSolver<Matrix4cd> es(rec.hermitized().rho);
            CHECK(es.eigenvalues().minCoeff() == Catch::Approx(rec.min_eigenvalue).margin(1e-12));
        }
        CHECK(rec.rho.trace().real() == Catch::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("fidelity estimates") {
    const Matrix4cd ideal = psi_ideal() * psi_ideal().adjoint();
    DensityMatrix4 dm;
    dm.rho = ideal;
    CHECK(fidelity_estimate(dm, psi_ideal()).f == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity_estimate(dm, psi_ideal()).witnesses_entanglement);

    dm.rho = Matrix4cd::Identity() / 4.0;
    const FidelityEstimate mixed = fidelity_estimate(dm, psi_ideal());
    CHECK(mixed.f == Catch::Approx(0.25).epsilon(1e-12));
    CHECK_FALSE(mixed.witnesses_entanglement);
}

TEST_CASE("expected-value simulation reproduces Born fractions") {
    const NoiseModel noise{0.66, 1.0, 0.75, 0.0, pi, pi};
    const auto [rho, p_pair] = post_selected_density(XiParams::ideal(), noise,
                                                     kron(pol_ket(Pol::H), pol_ket(Pol::H)));
    const auto settings = all_settings();
    EfficiencyBudget budget = reference_budget();
    const auto recs = simulate_counts(rho, budget, {settings.begin(), settings.end()}, 1,
                                      SimMode::expected_value, 1000);
    for (const auto& r : recs) {
        const auto p = born_probabilities(rho, r.basis_q1, r.basis_q2);
        const double total = r.total();
        for (int k = 0; k < 4; ++k)
            CHECK(r.counts[k] / total == Catch::Approx(p[k]).margin(1e-12));
    }

    SECTION("post-selected fractions are independent of the photon flux") {
        EfficiencyBudget brighter = budget;
        brighter.n_c *= 3.0;
        brighter.n_t *= 3.0;
        const auto recs2 = simulate_counts(rho, brighter, {settings.begin(), settings.end()}, 1,
                                           SimMode::expected_value, 1000);
        for (std::size_t i = 0; i < recs.size(); ++i) {
            for (int k = 0; k < 4; ++k) {
                CHECK(recs2[i].counts[k] / recs2[i].total() ==
                      Catch::Approx(recs[i].counts[k] / recs[i].total()).margin(1e-12));
            }
        }
        // The flux itself does change the coincidence rate.
        CHECK(recs2[0].total() > recs[0].total());
    }
}

TEST_CASE("sampling simulation is deterministic and statistically sound") {
    const NoiseModel noise{0.66, 1.0, 0.75, 0.0, pi, pi};
    const auto [rho, p_pair] = post_selected_density(XiParams::ideal(), noise,
                                                     kron(pol_ket(Pol::H), pol_ket(Pol::H)));
    const auto settings = all_settings();
    EfficiencyBudget budget = reference_budget();
    // A bright budget keeps the unit test cheap while still exercising the
    // multi-photon branch.
    budget.n_c = 1.0;
    budget.n_t = 1.0;
    budget.path_transmission_control = 1.0;
    budget.path_transmission_target = 1.0;
    budget.detector_qe = 1.0;

    const auto recs = simulate_counts(rho, budget, {settings.begin(), settings.end()}, 1234,
                                      SimMode::sampling, 60000);
    const auto recs2 = simulate_counts(rho, budget, {settings.begin(), settings.end()}, 1234,
                                       SimMode::sampling, 60000);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(recs[i].counts == recs2[i].counts);
        CHECK(recs[i].total() > 0.0);
    }

    const DensityMatrix4 rec = reconstruct_linear(recs);
    const double f_true = (psi_ideal().adjoint() * rho * psi_ideal())(0, 0).real();
    const FidelityEstimate est = fidelity_estimate(rec, psi_ideal(), &recs, 60, 5);
    // Multi-photon contamination can only wash out correlations.
    CHECK(est.f < f_true + 0.05);
    CHECK(est.f > 0.5);
    CHECK(est.stderr > 0.0);
    CHECK(est.stderr < 0.05);
}

TEST_CASE("end-to-end noisy tomography stays below the visibility bound") {
    const NoiseModel noise{0.66, 1.0, 0.75, 0.0, pi, pi};
    const auto [rho, p_pair] = post_selected_density(XiParams::ideal(), noise,
                                                     kron(pol_ket(Pol::H), pol_ket(Pol::H)));
    const auto settings = all_settings();
    const auto recs = simulate_counts(rho, reference_budget(), {settings.begin(), settings.end()},
                                      777, SimMode::sampling, 200000);
    const DensityMatrix4 rec = reconstruct_linear(recs);
    const FidelityEstimate est = fidelity_estimate(rec, psi_ideal());
    CHECK(est.f <= 0.77);
    CHECK(est.f > 0.65);
    CHECK(est.witnesses_entanglement);
}

TEST_CASE("averaged reconstructions converge to the truth") {
    const NoiseModel noise{0.66, 1.0, 0.75, 0.0, pi, pi};
    const auto [rho, p_pair] = post_selected_density(XiParams::ideal(), noise,
                                                     kron(pol_ket(Pol::H), pol_ket(Pol::H)));
    Rng rng(999);
    Matrix4cd mean = Matrix4cd::Zero();
    const int runs = 300;
    for (int n = 0; n < runs; ++n) {
        std::vector<CountRecord> recs;
        for (const auto& [b1, b2] : all_settings()) {
            CountRecord r;
            r.basis_q1 = b1;
            r.basis_q2 = b2;
            r.shots = 200.0;
            const auto p = born_probabilities(rho, b1, b2);
            for (int k = 0; k < 200; ++k) r.counts[rng.categorical(p, 1.0)] += 1.0;
            recs.push_back(r);
        }
        mean += reconstruct_linear(recs).rho / runs;
    }
    CHECK((mean - rho).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("simulated truth-table measurement") {
    const EfficiencyBudget budget = reference_budget();
    SECTION("ideal gate in expected-value mode") {
        const MeasuredTruthTable t =
            truth_table_measurement(XiParams::ideal(), std::nullopt, budget, 1000, 1,
                                    TruthTableKind::cnot_hv_first, SimMode::expected_value);
        CHECK(t.fidelity == Catch::Approx(1.0).epsilon(1e-9));
    }
    SECTION("swapped-roles variant runs with exchanged bases") {
        const MeasuredTruthTable t =
            truth_table_measurement(XiParams::ideal(), std::nullopt, budget, 1000, 1,
                                    TruthTableKind::cnot_hv_second, SimMode::expected_value);
        CHECK(t.fidelity == Catch::Approx(1.0).epsilon(1e-9));
        CHECK(t.ideal_layout.inputs[0][0] == Pol::R);
        CHECK(t.ideal_layout.inputs[0][1] == Pol::H);
    }
    SECTION("noisy model at the reference visibilities") {
        const NoiseModel noise{0.66, 1.0, 0.75, 0.0, pi, pi};
        const MeasuredTruthTable t =
            truth_table_measurement(XiParams::ideal(), noise, budget, 100000, 31,
                                    TruthTableKind::cnot_hv_first, SimMode::sampling);
        CHECK(t.fidelity > 0.6);
        CHECK(t.fidelity < 0.85);
        CHECK(t.fidelity_stderr > 0.0);
        for (int i = 0; i < 4; ++i) CHECK(t.coincidences[i] > 0.0);
    }
}
