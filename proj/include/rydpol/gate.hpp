#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "rydpol/constants.hpp"
#include "rydpol/eit.hpp"
#include "rydpol/errors.hpp"
#include "rydpol/parallel.hpp"
#include "rydpol/random.hpp"

namespace rydpol {

using Eigen::Matrix2cd;
using Eigen::Matrix4cd;
using Eigen::Vector2cd;
using Eigen::Vector4cd;

// ---------------------------------------------------------------------------
// Polarisation bases. Everything is expressed in the circular basis
// {|R>, |L>}, with |H> = (|R>+|L>)/sqrt2 and |V> = i(|R>-|L>)/sqrt2.
// Two-qubit indices run over {RR, RL, LR, LL}, control listed first.
// ---------------------------------------------------------------------------

enum class Pol { H, V, D, A, R, L };

inline Vector2cd pol_ket(Pol p) {
    const complexd i(0.0, 1.0);
    const double s = 1.0 / std::sqrt(2.0);
    switch (p) {
        case Pol::R: return Vector2cd(1.0, 0.0);
        case Pol::L: return Vector2cd(0.0, 1.0);
        case Pol::H: return Vector2cd(s, s);
        case Pol::V: return Vector2cd(i * s, -i * s);
        case Pol::D: return Vector2cd((1.0 + i) / 2.0, (1.0 - i) / 2.0);
        case Pol::A: return Vector2cd((1.0 - i) / 2.0, (1.0 + i) / 2.0);
    }
    return Vector2cd::Zero();
}

inline Pol pol_orthogonal(Pol p) {
    switch (p) {
        case Pol::H: return Pol::V;
        case Pol::V: return Pol::H;
        case Pol::D: return Pol::A;
        case Pol::A: return Pol::D;
        case Pol::R: return Pol::L;
        case Pol::L: return Pol::R;
    }
    return Pol::H;
}

inline const char* pol_name(Pol p) {
    switch (p) {
        case Pol::H: return "H";
        case Pol::V: return "V";
        case Pol::D: return "D";
        case Pol::A: return "A";
        case Pol::R: return "R";
        case Pol::L: return "L";
    }
    return "?";
}

inline Vector4cd kron(const Vector2cd& a, const Vector2cd& b) {
    Vector4cd v;
    v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
    return v;
}

inline Matrix4cd kron(const Matrix2cd& a, const Matrix2cd& b) {
    Matrix4cd m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
}

/// Ideal entangling-gate output for input |HH>: (|LH> - i|RV>)/sqrt2,
/// i.e. (|RR> - |RL> + |LR> + |LL>)/2.
inline Vector4cd psi_ideal() {
    Vector4cd v;
    v << 0.5, -0.5, 0.5, 0.5;
    return v;
}

// ---------------------------------------------------------------------------
// xi parameterisation of the gate channel.
// ---------------------------------------------------------------------------

/// Four complex numbers encoding per-channel loss and phase,
/// Re(xi_i) = OD_i/2 and Im(xi_i) = -beta_i. xi_3 is the interaction part.
struct XiParams {
    std::array<complexd, 4> xi{};

    double od(int i) const { return 2.0 * xi[i].real(); }
    double beta(int i) const { return -xi[i].imag(); }

    static XiParams from_od_beta(const std::array<double, 4>& od,
                                 const std::array<double, 4>& beta) {
        XiParams x;
        for (int i = 0; i < 4; ++i) x.xi[i] = complexd(od[i] / 2.0, -beta[i]);
        return x;
    }

    /// xi_1 = 0, xi_2 = xi_3 = i pi: unit post-selected fidelity.
    static XiParams ideal() {
        return from_od_beta({0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, pi, pi});
    }
};

/// Diagonal channel amplitudes on {RR, RL, LR, LL}.
inline Vector4cd channel_diag(const XiParams& x) {
    Vector4cd t;
    t << std::exp(-x.xi[0]), std::exp(-x.xi[0] - x.xi[2]), std::exp(-x.xi[0] - x.xi[1]),
        std::exp(-x.xi[0] - x.xi[1] - x.xi[2] - x.xi[3]);
    return t;
}

/// Two-photon output state plus the weight of the absorbed component.
struct GateState {
    Vector4cd amplitudes;  // on {RR, RL, LR, LL}
    complexd c_abs;        // amplitude of the absorbed component

    double pair_probability() const { return amplitudes.squaredNorm(); }

    Vector4cd post_selected() const {
        const double n = amplitudes.norm();
        if (n == 0.0) throw NonPhysical("all two-photon amplitudes vanish");
        return amplitudes / n;
    }
};

/// Applies the diagonal channel to an arbitrary two-qubit input state.
inline GateState apply_channel(const XiParams& x, const Vector4cd& input) {
    GateState s;
    s.amplitudes = channel_diag(x).cwiseProduct(input);
    const double p = s.amplitudes.squaredNorm();
    if (p > 1.0 + 1e-9) {
        throw NonPhysical("channel amplifies: sum of |amplitudes|^2 exceeds 1");
    }
    s.c_abs = std::sqrt(std::max(0.0, 1.0 - p));
    return s;
}

/// Output state for input |HH> (the entangling-gate operation).
inline GateState output_state(const XiParams& x) {
    return apply_channel(x, kron(pol_ket(Pol::H), pol_ket(Pol::H)));
}

enum class GateQubit { control, target };
enum class GateArm { r, l };

/// Linear-optics compensation acting on one qubit: attenuates (never
/// amplifies) and phase shifts one circular arm. Only (xi_0, xi_1) or
/// (xi_0, xi_2) change; xi_3 is untouched by construction.
inline XiParams compensate_single_qubit(const XiParams& x, GateQubit qubit, GateArm arm,
                                        double attenuation, double phase) {
    if (!(attenuation > 0.0)) throw ConfigError("attenuation must be positive");
    if (attenuation > 1.0) throw GainForbidden("single-qubit operations may not amplify");
    const complexd shift(-std::log(attenuation), -phase);
    XiParams out = x;
    const int k = qubit == GateQubit::control ? 1 : 2;
    if (arm == GateArm::r) {
        // R-arm factor enters the global channel and is compensated out of
        // the differential term.
        out.xi[0] += shift;
        out.xi[k] -= shift;
    } else {
        out.xi[k] += shift;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Phase-fluctuation model.
// ---------------------------------------------------------------------------

/// Independent fluctuations of beta_1, beta_2, beta_3 with visibilities
/// V_i = |E[exp(i beta_i)]| and symmetric distributions around the means.
struct NoiseModel {
    double v1 = 1.0, v2 = 1.0, v3 = 1.0;
    double mean_beta1 = 0.0, mean_beta2 = 0.0, mean_beta3 = 0.0;

    void validate() const {
        for (double v : {v1, v2, v3})
            if (v < 0.0 || v > 1.0) throw ConfigError("visibilities must lie in [0, 1]");
    }
};

namespace detail {

// Integer coefficients of (beta_1, beta_2, beta_3) in each channel phase.
inline const std::array<std::array<int, 3>, 4>& channel_phase_coeffs() {
    static const std::array<std::array<int, 3>, 4> k = {{
        {{0, 0, 0}},  // RR
        {{0, 1, 0}},  // RL
        {{1, 0, 0}},  // LR
        {{1, 1, 1}},  // LL
    }};
    return k;
}

}  // namespace detail

/// E[t_j conj(t_k)] for the fluctuating channel. Every phase difference is a
/// first-order integer combination of the beta_i, so the average factorises
/// into visibilities exactly.
inline Matrix4cd channel_correlation(const XiParams& x, const NoiseModel& noise) {
    noise.validate();
    const auto& coeff = detail::channel_phase_coeffs();
    const std::array<double, 3> vis{noise.v1, noise.v2, noise.v3};
    const std::array<double, 3> mean{noise.mean_beta1, noise.mean_beta2, noise.mean_beta3};
    std::array<double, 4> mag{};
    std::array<double, 4> arg{};
    const Vector4cd t = channel_diag(x);
    for (int j = 0; j < 4; ++j) {
        mag[j] = std::abs(t(j));
        arg[j] = 0.0;
        for (int i = 0; i < 3; ++i) arg[j] += coeff[j][i] * mean[i];
    }
    Matrix4cd corr;
    for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
            double v = 1.0;
            for (int i = 0; i < 3; ++i) {
                if (coeff[j][i] != coeff[k][i]) v *= vis[i];
            }
            corr(j, k) = mag[j] * mag[k] * v *
                         std::exp(complexd(0.0, arg[j] - arg[k]));
        }
    }
    return corr;
}

/// Ensemble-averaged (unnormalised) output density matrix for a given input.
inline Matrix4cd mean_output_density(const XiParams& x, const NoiseModel& noise,
                                     const Vector4cd& input) {
    const Matrix4cd corr = channel_correlation(x, noise);
    return corr.cwiseProduct(input * input.adjoint());
}

/// Post-selected ensemble state and the pair-survival probability.
inline std::pair<Matrix4cd, double> post_selected_density(const XiParams& x,
                                                          const NoiseModel& noise,
                                                          const Vector4cd& input) {
    const Matrix4cd rho = mean_output_density(x, noise, input);
    const double p = rho.trace().real();
    if (p <= 0.0) throw NonPhysical("post-selection probability vanishes");
    return {rho / p, p};
}

// ---------------------------------------------------------------------------
// Truth tables.
// ---------------------------------------------------------------------------

enum class TruthTableKind {
    circular,        // inputs and analysis in R/L (x) R/L
    cnot_hv_first,   // first qubit H/V, second R/L; flip of H/V controlled by |L>
    cnot_hv_second,  // roles swapped; flip of H/V controlled by |R>
};

struct TruthTable {
    TruthTableKind kind = TruthTableKind::circular;
    std::array<std::array<Pol, 2>, 4> inputs;
    std::array<std::array<Pol, 2>, 4> outputs;
    // p[i][o]: post-selected probability of output o for input i.
    std::array<std::array<double, 4>, 4> p{};
    std::array<int, 4> desired{};  // index of the desired output per input
    double fidelity = 0.0;         // mean desired-output probability
};

namespace detail {

inline std::array<std::array<Pol, 2>, 4> pair_grid(const std::array<Pol, 2>& first,
                                                   const std::array<Pol, 2>& second) {
    return {{{first[0], second[0]},
             {first[0], second[1]},
             {first[1], second[0]},
             {first[1], second[1]}}};
}

}  // namespace detail

/// Post-selected truth table for the channel, optionally averaged over phase
/// noise. The desired mapping is the ideal gate (conditional phase flip in
/// the circular basis; CNOT in the mixed bases).
inline TruthTable truth_table(const XiParams& x, TruthTableKind kind,
                              const std::optional<NoiseModel>& noise = std::nullopt) {
    TruthTable tt;
    tt.kind = kind;
    switch (kind) {
        case TruthTableKind::circular:
            tt.inputs = detail::pair_grid({Pol::R, Pol::L}, {Pol::R, Pol::L});
            tt.desired = {0, 1, 2, 3};
            break;
        case TruthTableKind::cnot_hv_first:
            tt.inputs = detail::pair_grid({Pol::H, Pol::V}, {Pol::R, Pol::L});
            // |L> on the second qubit exchanges H and V on the first.
            tt.desired = {0, 3, 2, 1};
            break;
        case TruthTableKind::cnot_hv_second:
            tt.inputs = detail::pair_grid({Pol::R, Pol::L}, {Pol::H, Pol::V});
            // |R> on the first qubit exchanges H and V on the second.
            tt.desired = {1, 0, 2, 3};
            break;
    }
    tt.outputs = tt.inputs;

    const NoiseModel effective = noise.value_or(NoiseModel{
        1.0, 1.0, 1.0, x.beta(1), x.beta(2), x.beta(3)});
    double fid = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Vector4cd in = kron(pol_ket(tt.inputs[i][0]), pol_ket(tt.inputs[i][1]));
        const auto [rho, p_pair] = post_selected_density(x, effective, in);
        double norm = 0.0;
        std::array<double, 4> row{};
        for (int o = 0; o < 4; ++o) {
            const Vector4cd out = kron(pol_ket(tt.outputs[o][0]), pol_ket(tt.outputs[o][1]));
            row[o] = std::max(0.0, (out.adjoint() * rho * out)(0, 0).real());
            norm += row[o];
        }
        for (int o = 0; o < 4; ++o) tt.p[i][o] = row[o] / norm;
        fid += tt.p[i][tt.desired[i]];
    }
    tt.fidelity = fid / 4.0;
    return tt;
}

// ---------------------------------------------------------------------------
// Fidelity algebra.
// ---------------------------------------------------------------------------

/// Overlap fidelity of the equal-population output state with phases
/// (beta_1, beta_2, beta_3) against the ideal entangled state.
inline double fidelity_f_beta(double b1, double b2, double b3) {
    return (2.0 + std::cos(b1) - std::cos(b2) + std::cos(b1 + b2 + b3) - std::cos(b1 - b2) -
            std::cos(b1 + b3) + std::cos(b2 + b3)) /
           8.0;
}

/// Phase-averaged entangling fidelity at mean phases (0, pi, pi):
/// F_e = (1+V1)(1+V2)(1+V3)/8 + (1-V3)/8.
inline double f_e_three_visibilities(double v1, double v2, double v3) {
    return (1.0 + v1) * (1.0 + v2) * (1.0 + v3) / 8.0 + (1.0 - v3) / 8.0;
}

/// Upper bound on the entangling fidelity given the measured control and
/// target visibilities: the worst case V2 = 1, V3 = V_t of V_t = V2 V3.
inline double entangling_fidelity_bound(double v_c, double v_t) {
    if (v_c < 0.0 || v_c > 1.0 || v_t < 0.0 || v_t > 1.0) {
        throw ConfigError("visibilities must lie in [0, 1]");
    }
    return (1.0 + v_c) * (1.0 + v_t) / 4.0 + (1.0 - v_t) / 8.0;
}

/// Monte-Carlo average of F_beta over von Mises phase fluctuations matched
/// to the noise model. Reproducible given (seed, samples, tasks).
inline double f_e_monte_carlo(const NoiseModel& noise, std::size_t samples, std::uint64_t seed,
                              int tasks = 1) {
    noise.validate();
    const double k1 = von_mises_kappa_for_visibility(noise.v1);
    const double k2 = von_mises_kappa_for_visibility(noise.v2);
    const double k3 = von_mises_kappa_for_visibility(noise.v3);
    if (tasks < 1) tasks = 1;
    std::vector<double> partial(tasks, 0.0);
    std::vector<std::size_t> counts(tasks, samples / tasks);
    counts[0] += samples % tasks;
    parallel_for(tasks, [&](std::size_t t) {
        Rng rng(substream_seed(seed, t));
        double acc = 0.0;
        for (std::size_t n = 0; n < counts[t]; ++n) {
            const double b1 = sample_von_mises(rng, noise.mean_beta1, k1);
            const double b2 = sample_von_mises(rng, noise.mean_beta2, k2);
            const double b3 = sample_von_mises(rng, noise.mean_beta3, k3);
            acc += fidelity_f_beta(b1, b2, b3);
        }
        partial[t] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total / static_cast<double>(samples);
}

/// Average post-selected fidelity of the polarisation memory,
/// F_m = (2 + 2 V_c + (1+eps_R)^-1 + (1+eps_L)^-1)/6.
inline double memory_fidelity(double v_c, double eps_r, double eps_l) {
    if (v_c < 0.0 || v_c > 1.0 || eps_r < 0.0 || eps_r > 1.0 || eps_l < 0.0 || eps_l > 1.0) {
        throw ConfigError("memory-fidelity inputs must lie in [0, 1]");
    }
    return (2.0 + 2.0 * v_c + 1.0 / (1.0 + eps_r) + 1.0 / (1.0 + eps_l)) / 6.0;
}

/// Counterpart model with pure population fluctuations: the three circular
/// arms are jittered in amplitude instead of phase, at the ideal mean phases.
/// Returns the sampled F_e together with the visibilities the jitter induces.
struct PopulationModelResult {
    double f_e = 0.0;
    double v1 = 0.0, v2 = 0.0, v3 = 0.0;
};

inline PopulationModelResult population_model_fe(double jitter_sigma, std::size_t samples,
                                                 std::uint64_t seed) {
    Rng rng(substream_seed(seed, 0));
    const double half_width = std::sqrt(3.0) * jitter_sigma;  // uniform, variance sigma^2
    const Vector4cd ideal = psi_ideal();
    PopulationModelResult res;
    double f_acc = 0.0;
    std::array<double, 3> v_acc{};
    for (std::size_t n = 0; n < samples; ++n) {
        std::array<double, 3> w;
        for (int i = 0; i < 3; ++i) {
            w[i] = 1.0 + rng.uniform(-half_width, half_width);
            v_acc[i] += 2.0 * w[i] / (1.0 + w[i] * w[i]);
        }
        Vector4cd psi;
        psi << 1.0, -w[1], w[0], w[0] * w[1] * w[2];
        psi /= psi.norm();
        f_acc += std::norm(ideal.dot(psi));
    }
    res.f_e = f_acc / static_cast<double>(samples);
    res.v1 = v_acc[0] / static_cast<double>(samples);
    res.v2 = v_acc[1] / static_cast<double>(samples);
    res.v3 = v_acc[2] / static_cast<double>(samples);
    return res;
}

// ---------------------------------------------------------------------------
// Stokes observables.
// ---------------------------------------------------------------------------

struct StokesVector {
    double s_h = 0.0, s_d = 0.0, s_r = 0.0;
    double v = 0.0;    // sqrt(s_h^2 + s_d^2)
    double phi = 0.0;  // azimuth, (-pi, pi]
    bool phi_defined = true;
};

/// Stokes parameters from the six analyser powers (P_H, P_V, P_D, P_A, P_R, P_L).
inline StokesVector stokes_from_powers(const std::array<double, 6>& p) {
    const auto pair = [&](int a, int b, const char* name) {
        const double sum = p[a] + p[b];
        if (sum <= 0.0) throw ZeroPower(std::string("no power in the ") + name + " basis pair");
        return (p[a] - p[b]) / sum;
    };
    StokesVector s;
    s.s_h = pair(0, 1, "H/V");
    s.s_d = pair(2, 3, "D/A");
    s.s_r = pair(4, 5, "R/L");
    s.v = std::hypot(s.s_h, s.s_d);
    if (s.v > 0.0) {
        s.phi = std::atan2(s.s_d, s.s_h);
    } else {
        s.phi = 0.0;
        s.phi_defined = false;
    }
    return s;
}

inline StokesVector stokes_from_density(const Matrix2cd& rho) {
    std::array<double, 6> p{};
    const std::array<Pol, 6> basis{Pol::H, Pol::V, Pol::D, Pol::A, Pol::R, Pol::L};
    for (int i = 0; i < 6; ++i) {
        const Vector2cd k = pol_ket(basis[i]);
        p[i] = std::max(0.0, (k.adjoint() * rho * k)(0, 0).real());
    }
    return stokes_from_powers(p);
}

// ---------------------------------------------------------------------------
// Efficiency bookkeeping.
// ---------------------------------------------------------------------------

struct EfficiencyBudget {
    double eta_r = 1.0, eta_l = 1.0;  // control storage+retrieval efficiencies
    double t_r = 1.0, t_l = 1.0;      // target transmissions
    double detector_qe = 1.0;
    double n_c = 1.0, n_t = 1.0;  // mean photon numbers per pulse
    // Fixed technical transmissions behind the ensemble (fibres, second
    // interferometer, analysis window), per photon.
    double path_transmission_control = 1.0;
    double path_transmission_target = 1.0;
    long long shots = 1;

    // Experimental duty cycle: one shot every 100 us, 1e4 shots per atomic
    // sample, one sample every 18 s.
    double shot_period_us = 100.0;
    double shots_per_sample = 1e4;
    double sample_period_s = 18.0;

    void validate() const {
        for (double v : {eta_r, eta_l, t_r, t_l, detector_qe, path_transmission_control,
                         path_transmission_target}) {
            if (v < 0.0 || v > 1.0) throw ConfigError("efficiencies must lie in [0, 1]");
        }
        if (!(n_c > 0.0) || !(n_t > 0.0)) throw ConfigError("mean photon numbers must be > 0");
        if (shots < 1) throw ConfigError("shots must be >= 1");
    }
};

struct EfficiencyMatrix {
    // pair_transmission[i][j] = eta_i * T_j for i, j in {R, L}.
    std::array<std::array<double, 2>, 2> pair_transmission{};
    double min = 0.0, max = 0.0;
    double p_shot = 0.0;              // coincidence probability per shot
    double coincidences_per_minute = 0.0;
};

/// eta_i T_j table plus the per-shot coincidence estimate for H (x) H input:
/// thinned Poisson detection with polarisation-averaged survival.
inline EfficiencyMatrix efficiency_matrix(const EfficiencyBudget& b) {
    b.validate();
    EfficiencyMatrix m;
    const std::array<double, 2> eta{b.eta_r, b.eta_l};
    const std::array<double, 2> t{b.t_r, b.t_l};
    m.min = 1.0;
    m.max = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            m.pair_transmission[i][j] = eta[i] * t[j];
            m.min = std::min(m.min, m.pair_transmission[i][j]);
            m.max = std::max(m.max, m.pair_transmission[i][j]);
        }
    }
    const double s_c =
        0.5 * (b.eta_r + b.eta_l) * b.detector_qe * b.path_transmission_control;
    const double s_t = 0.5 * (b.t_r + b.t_l) * b.detector_qe * b.path_transmission_target;
    m.p_shot = (1.0 - std::exp(-b.n_c * s_c)) * (1.0 - std::exp(-b.n_t * s_t));
    const double shots_per_minute =
        60.0 / b.sample_period_s * b.shots_per_sample;
    m.coincidences_per_minute = m.p_shot * shots_per_minute;
    return m;
}

/// Detection probability of one photon of a surviving pair, per side.
inline double pair_detection_probability(const EfficiencyBudget& b, GateQubit side) {
    return side == GateQubit::control ? b.detector_qe * b.path_transmission_control
                                      : b.detector_qe * b.path_transmission_target;
}

// ---------------------------------------------------------------------------
// Comparison with an excitation-hopping phase shift.
// ---------------------------------------------------------------------------

struct HoppingComparison {
    double decay_factor = 0.0;            // retrieval loss from doubling the dark time
    double extrapolated_efficiency = 0.0; // interaction_factor * decay * T^2 * eta
    double c6_over_chi6 = 0.0;            // van der Waals vs exchange strength
};

/// Thermal-motion retrieval decay exp(-(t_d/tau)^2) evaluated for a doubled
/// dark time, and the resulting best-case efficiency of a cascaded pi shift.
inline HoppingComparison hopping_comparison(double t_d, double tau, double eta, double t_single,
                                            double interaction_factor = 0.82,
                                            double c6_over_chi6 = 29.0) {
    if (!(t_d >= 0.0) || !(tau > 0.0)) throw ConfigError("times must be positive");
    HoppingComparison h;
    const double x = t_d / tau;
    h.decay_factor = std::exp(-(2.0 * x) * (2.0 * x)) / std::exp(-x * x);
    h.extrapolated_efficiency = interaction_factor * h.decay_factor * t_single * t_single * eta;
    h.c6_over_chi6 = c6_over_chi6;
    return h;
}

// ---------------------------------------------------------------------------
// Target R-channel.
// ---------------------------------------------------------------------------

struct RChannel {
    double od = 0.0;
    double beta = 0.0;
    double transmission = 0.0;
};

/// Off-resonant response of the R-polarised target photon: a two-level
/// channel whose resonant optical depth is dipole_od_ratio times smaller
/// than the main transition.
inline RChannel target_r_channel(const MediumParams& m, double delta_s,
                                 double dipole_od_ratio = 6.0) {
    MediumParams weak = m;
    weak.chi0_override = chi0(m) / dipole_od_ratio;
    const Propagation p = propagate(weak, susceptibility_two_level(weak, delta_s));
    return RChannel{p.od, p.beta, p.transmission};
}

}  // namespace rydpol
