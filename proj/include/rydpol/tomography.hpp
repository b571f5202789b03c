#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rydpol/errors.hpp"
#include "rydpol/gate.hpp"
#include "rydpol/random.hpp"

namespace rydpol {

// ---------------------------------------------------------------------------
// Measurement settings: all nine pairs of single-qubit analysis bases.
// Outcome order within a setting: (+,+), (+,-), (-,+), (-,-) with + the
// first polarisation of the basis pair (H, D or R).
// ---------------------------------------------------------------------------

enum class AnalysisBasis { HV, DA, RL };

inline const char* basis_name(AnalysisBasis b) {
    switch (b) {
        case AnalysisBasis::HV: return "HV";
        case AnalysisBasis::DA: return "DA";
        case AnalysisBasis::RL: return "RL";
    }
    return "?";
}

inline Pol basis_plus(AnalysisBasis b) {
    switch (b) {
        case AnalysisBasis::HV: return Pol::H;
        case AnalysisBasis::DA: return Pol::D;
        case AnalysisBasis::RL: return Pol::R;
    }
    return Pol::H;
}

/// sigma_b = |+><+| - |-><-| for the basis pair.
inline Matrix2cd stokes_operator(AnalysisBasis b) {
    const Vector2cd plus = pol_ket(basis_plus(b));
    const Vector2cd minus = pol_ket(pol_orthogonal(basis_plus(b)));
    return plus * plus.adjoint() - minus * minus.adjoint();
}

inline std::array<std::pair<AnalysisBasis, AnalysisBasis>, 9> all_settings() {
    std::array<std::pair<AnalysisBasis, AnalysisBasis>, 9> s;
    const std::array<AnalysisBasis, 3> bases{AnalysisBasis::HV, AnalysisBasis::DA,
                                             AnalysisBasis::RL};
    int k = 0;
    for (auto a : bases)
        for (auto b : bases) s[k++] = {a, b};
    return s;
}

/// Coincidence counts for one analysis setting. Expected-value simulations
/// produce fractional counts.
struct CountRecord {
    AnalysisBasis basis_q1 = AnalysisBasis::HV;
    AnalysisBasis basis_q2 = AnalysisBasis::HV;
    std::array<double, 4> counts{};  // (+,+), (+,-), (-,+), (-,-)
    double shots = 0.0;

    double total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

/// Born probabilities of the four coincidence outcomes of a setting.
inline std::array<double, 4> born_probabilities(const Matrix4cd& rho, AnalysisBasis b1,
                                                AnalysisBasis b2) {
    std::array<double, 4> p{};
    const std::array<Pol, 2> p1{basis_plus(b1), pol_orthogonal(basis_plus(b1))};
    const std::array<Pol, 2> p2{basis_plus(b2), pol_orthogonal(basis_plus(b2))};
    int k = 0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Vector4cd out = kron(pol_ket(p1[i]), pol_ket(p2[j]));
            p[k++] = std::max(0.0, (out.adjoint() * rho * out)(0, 0).real());
        }
    }
    return p;
}

inline Matrix2cd partial_trace_control(const Matrix4cd& rho) {
    Matrix2cd r = Matrix2cd::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
    return r;
}

inline Matrix2cd partial_trace_target(const Matrix4cd& rho) {
    Matrix2cd r = Matrix2cd::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r(i, j) = rho(i, j) + rho(2 + i, 2 + j);
    return r;
}

// ---------------------------------------------------------------------------
// Forward model.
// ---------------------------------------------------------------------------

enum class SimMode { expected_value, sampling };

/// Simulates coincidence counting for each analysis setting. `rho` is the
/// post-selected pair state; the budget fixes the per-shot coincidence
/// statistics. In sampling mode each pulse draws thinned-Poisson detected
/// photon numbers; when extra photons are detected alongside the pair the
/// analysed click is uncorrelated with the partner qubit, which is what
/// degrades post-selected statistics in multi-photon shots.
inline std::vector<CountRecord> simulate_counts(
    const Matrix4cd& rho, const EfficiencyBudget& budget,
    const std::vector<std::pair<AnalysisBasis, AnalysisBasis>>& settings, std::uint64_t seed,
    SimMode mode = SimMode::sampling, long long shots_per_setting = -1) {
    budget.validate();
    const long long shots = shots_per_setting > 0 ? shots_per_setting : budget.shots;
    const double s_c =
        0.5 * (budget.eta_r + budget.eta_l) * pair_detection_probability(budget, GateQubit::control);
    const double s_t =
        0.5 * (budget.t_r + budget.t_l) * pair_detection_probability(budget, GateQubit::target);

    std::vector<CountRecord> records(settings.size());
    const Matrix2cd rho_c = partial_trace_target(rho);
    const Matrix2cd rho_t = partial_trace_control(rho);

    parallel_for(settings.size(), [&](std::size_t si) {
        const auto [b1, b2] = settings[si];
        CountRecord rec;
        rec.basis_q1 = b1;
        rec.basis_q2 = b2;
        rec.shots = static_cast<double>(shots);
        const std::array<double, 4> joint = born_probabilities(rho, b1, b2);

        if (mode == SimMode::expected_value) {
            const double coincidences =
                static_cast<double>(shots) * (1.0 - std::exp(-budget.n_c * s_c)) *
                (1.0 - std::exp(-budget.n_t * s_t));
            for (int k = 0; k < 4; ++k) rec.counts[k] = coincidences * joint[k];
            records[si] = rec;
            return;
        }

        // Single-qubit outcome probabilities for uncorrelated excess clicks.
        const Vector2cd k1p = pol_ket(basis_plus(b1));
        const Vector2cd k2p = pol_ket(basis_plus(b2));
        const double p1_plus =
            std::max(0.0, (k1p.adjoint() * rho_c * k1p)(0, 0).real());
        const double p2_plus =
            std::max(0.0, (k2p.adjoint() * rho_t * k2p)(0, 0).real());

        Rng rng(substream_seed(seed, 1000 + si));
        const double joint_total = joint[0] + joint[1] + joint[2] + joint[3];
        for (long long shot = 0; shot < shots; ++shot) {
            const int dc = rng.poisson(budget.n_c * s_c);
            const int dt = rng.poisson(budget.n_t * s_t);
            if (dc < 1 || dt < 1) continue;
            // The analysed click on each side is one detected photon; it is
            // the pair photon with probability 1/d.
            const bool correlated = rng.uniform() * dc < 1.0 && rng.uniform() * dt < 1.0;
            int outcome;
            if (correlated) {
                outcome = static_cast<int>(rng.categorical(joint, joint_total));
            } else {
                const int o1 = rng.uniform() < p1_plus ? 0 : 1;
                const int o2 = rng.uniform() < p2_plus ? 0 : 1;
                outcome = 2 * o1 + o2;
            }
            rec.counts[outcome] += 1.0;
        }
        records[si] = rec;
    });
    return records;
}

// ---------------------------------------------------------------------------
// Linear inversion.
// ---------------------------------------------------------------------------

enum class EstimatorFlavor { raw_linear, hermitized, trace_normalized };

struct DensityMatrix4 {
    Matrix4cd rho = Matrix4cd::Zero();
    EstimatorFlavor flavor = EstimatorFlavor::raw_linear;
    double min_eigenvalue = 0.0;
    bool has_negative_eigenvalue = false;

    DensityMatrix4 hermitized() const {
        DensityMatrix4 out = *this;
        out.rho = (rho + rho.adjoint()) / 2.0;
        out.flavor = EstimatorFlavor::hermitized;
        return out;
    }

    DensityMatrix4 trace_normalized() const {
        DensityMatrix4 out = *this;
        const double tr = rho.trace().real();
        if (tr == 0.0) throw NonPhysical("trace vanishes; cannot normalise");
        out.rho = rho / tr;
        out.flavor = EstimatorFlavor::trace_normalized;
        return out;
    }
};

namespace detail {

inline int basis_index(AnalysisBasis b) { return static_cast<int>(b); }

inline void annotate_spectrum(DensityMatrix4& dm) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es((dm.rho + dm.rho.adjoint()) / 2.0);
    dm.min_eigenvalue = es.eigenvalues().minCoeff();
    dm.has_negative_eigenvalue = dm.min_eigenvalue < -1e-12;
}

}  // namespace detail

/// Linear unbiased estimator: two-qubit Stokes correlations from normalised
/// count differences, assembled as rho = (1/4) sum <s_i (x) s_j> s_i (x) s_j.
/// Single-qubit terms are averaged over the three settings that share the
/// basis. Negative eigenvalues are reported, never clipped.
inline DensityMatrix4 reconstruct_linear(const std::vector<CountRecord>& records) {
    std::array<std::array<const CountRecord*, 3>, 3> by_setting{};
    for (const auto& rec : records) {
        by_setting[detail::basis_index(rec.basis_q1)][detail::basis_index(rec.basis_q2)] = &rec;
    }
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            const CountRecord* rec = by_setting[a][b];
            if (!rec) throw MissingSetting("tomography requires all 9 analysis settings");
            if (!(rec->total() > 0.0)) {
                throw ZeroCoincidences(std::string("no coincidences in setting ") +
                                       basis_name(static_cast<AnalysisBasis>(a)) + "/" +
                                       basis_name(static_cast<AnalysisBasis>(b)));
            }
        }
    }

    // Normalised correlation and marginal estimates.
    std::array<std::array<double, 3>, 3> corr{};
    std::array<double, 3> marg1{};
    std::array<double, 3> marg2{};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            const CountRecord& r = *by_setting[a][b];
            const double n = r.total();
            corr[a][b] = (r.counts[0] - r.counts[1] - r.counts[2] + r.counts[3]) / n;
            marg1[a] += (r.counts[0] + r.counts[1] - r.counts[2] - r.counts[3]) / n / 3.0;
            marg2[b] += (r.counts[0] - r.counts[1] + r.counts[2] - r.counts[3]) / n / 3.0;
        }
    }

    const Matrix2cd id = Matrix2cd::Identity();
    DensityMatrix4 dm;
    dm.rho = kron(id, id) / 4.0;
    for (int a = 0; a < 3; ++a) {
        const Matrix2cd sa = stokes_operator(static_cast<AnalysisBasis>(a));
        dm.rho += marg1[a] * kron(sa, id) / 4.0;
        dm.rho += marg2[a] * kron(id, sa) / 4.0;
        for (int b = 0; b < 3; ++b) {
            const Matrix2cd sb = stokes_operator(static_cast<AnalysisBasis>(b));
            dm.rho += corr[a][b] * kron(sa, sb) / 4.0;
        }
    }
    detail::annotate_spectrum(dm);
    return dm;
}

struct FidelityEstimate {
    double f = 0.0;
    double stderr = 0.0;
    bool witnesses_entanglement = false;  // f > 1/2
};

/// F = <psi|rho|psi>; the spread comes from bootstrap resampling of the
/// counts when records are supplied.
inline FidelityEstimate fidelity_estimate(const DensityMatrix4& dm, const Vector4cd& psi,
                                          const std::vector<CountRecord>* records = nullptr,
                                          int bootstrap = 200, std::uint64_t seed = 1) {
    FidelityEstimate est;
    est.f = (psi.adjoint() * dm.rho * psi)(0, 0).real();
    est.witnesses_entanglement = est.f > 0.5;
    if (!records || bootstrap < 2) return est;

    Rng rng(substream_seed(seed, 77));
    double sum = 0.0, sum2 = 0.0;
    for (int b = 0; b < bootstrap; ++b) {
        std::vector<CountRecord> resampled = *records;
        for (auto& rec : resampled) {
            const double n = rec.total();
            const long long ni = static_cast<long long>(std::llround(n));
            std::array<double, 4> p = rec.counts;
            rec.counts = {0.0, 0.0, 0.0, 0.0};
            for (long long k = 0; k < ni; ++k) {
                rec.counts[rng.categorical(p, n)] += 1.0;
            }
        }
        const DensityMatrix4 r = reconstruct_linear(resampled);
        const double f = (psi.adjoint() * r.rho * psi)(0, 0).real();
        sum += f;
        sum2 += f * f;
    }
    const double mean = sum / bootstrap;
    est.stderr = std::sqrt(std::max(0.0, sum2 / bootstrap - mean * mean));
    return est;
}

// ---------------------------------------------------------------------------
// Simulated truth-table measurement.
// ---------------------------------------------------------------------------

struct MeasuredTruthTable {
    TruthTable ideal_layout;  // inputs, outputs, desired mapping
    std::array<std::array<double, 4>, 4> p{};
    std::array<std::array<double, 4>, 4> stderr{};
    std::array<double, 4> coincidences{};
    double fidelity = 0.0;
    double fidelity_stderr = 0.0;
};

/// End-to-end protocol: each input state is prepared repeatedly, the output
/// analysed in the truth-table bases, and post-selected probabilities
/// reported with binomial errors.
inline MeasuredTruthTable truth_table_measurement(const XiParams& x,
                                                  const std::optional<NoiseModel>& noise,
                                                  const EfficiencyBudget& budget,
                                                  long long shots, std::uint64_t seed,
                                                  TruthTableKind kind,
                                                  SimMode mode = SimMode::sampling) {
    budget.validate();
    MeasuredTruthTable meas;
    meas.ideal_layout = truth_table(x, kind, noise);
    const NoiseModel effective = noise.value_or(NoiseModel{
        1.0, 1.0, 1.0, x.beta(1), x.beta(2), x.beta(3)});
    const double p_coinc = efficiency_matrix(budget).p_shot;

    double fid_var = 0.0;
    for (int i = 0; i < 4; ++i) {
        const auto& in_pols = meas.ideal_layout.inputs[i];
        const Vector4cd in = kron(pol_ket(in_pols[0]), pol_ket(in_pols[1]));
        const auto [rho, p_pair] = post_selected_density(x, effective, in);

        // Outcome probabilities in the analysis bases of this table.
        std::array<double, 4> born{};
        double norm = 0.0;
        for (int o = 0; o < 4; ++o) {
            const auto& out_pols = meas.ideal_layout.outputs[o];
            const Vector4cd out = kron(pol_ket(out_pols[0]), pol_ket(out_pols[1]));
            born[o] = std::max(0.0, (out.adjoint() * rho * out)(0, 0).real());
            norm += born[o];
        }
        for (auto& b : born) b /= norm;

        if (mode == SimMode::expected_value) {
            meas.coincidences[i] = static_cast<double>(shots) * p_coinc;
            for (int o = 0; o < 4; ++o) {
                meas.p[i][o] = born[o];
                meas.stderr[i][o] = 0.0;
            }
        } else {
            Rng rng(substream_seed(seed, 2000 + i));
            long long n_coinc = 0;
            std::array<double, 4> counts{};
            for (long long s = 0; s < shots; ++s) {
                if (rng.uniform() >= p_coinc) continue;
                ++n_coinc;
                counts[rng.categorical(born, 1.0)] += 1.0;
            }
            if (n_coinc == 0) throw ZeroCoincidences("no coincidences for a truth-table input");
            meas.coincidences[i] = static_cast<double>(n_coinc);
            for (int o = 0; o < 4; ++o) {
                meas.p[i][o] = counts[o] / n_coinc;
                meas.stderr[i][o] =
                    std::sqrt(meas.p[i][o] * (1.0 - meas.p[i][o]) / n_coinc);
            }
        }
        const int d = meas.ideal_layout.desired[i];
        meas.fidelity += meas.p[i][d] / 4.0;
        fid_var += meas.stderr[i][d] * meas.stderr[i][d] / 16.0;
    }
    meas.fidelity_stderr = std::sqrt(fid_var);
    return meas;
}

}  // namespace rydpol
