// rydpol: numerical model of a Rydberg-EIT photon-photon gate.
//
// Subcommands map onto the model layers: EIT spectra, blockade response,
// operating-point optimization, storage-position visibility, gate truth
// tables and fidelity bounds, coincidence-counting tomography, and repro
// targets that check the bundled reference numbers.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rydpol/blockade.hpp"
#include "rydpol/config.hpp"
#include "rydpol/eit.hpp"
#include "rydpol/gate.hpp"
#include "rydpol/io.hpp"
#include "rydpol/optimizer.hpp"
#include "rydpol/repro.hpp"
#include "rydpol/tomography.hpp"
#include "rydpol/units.hpp"
#include "rydpol/visibility.hpp"

using nlohmann::json;
using namespace rydpol;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_config = 2;
constexpr int exit_infeasible = 3;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
};

ConfigDoc load_and_validate(const std::string& path) {
    if (path.empty()) throw ConfigError("--config is required for this command");
    const ConfigDoc doc = load_config(path);
    if (doc.has_section("medium")) medium_from_config(doc);
    if (doc.has_section("drive")) drive_from_config(doc);
    if (doc.has_section("fig4")) {
        doc.number("fig4", "omega_c_mhz");
        doc.number("fig4", "delta_s_mhz");
    }
    if (doc.has_section("noise")) visibilities_from_config(doc);
    if (doc.has_section("budget")) budget_from_config(doc);
    if (doc.has_section("hopping")) hopping_from_config(doc);
    doc.check_consumed();
    return doc;
}

std::uint64_t require_seed(const CommonOpts& opts) {
    if (!opts.seed) throw ConfigError("--seed is required for sampling commands");
    return *opts.seed;
}

void emit_json(const CommonOpts& opts, const json& j) {
    OutputTarget target(opts.out_path);
    target.stream() << j.dump(2) << "\n";
}

json operating_point_json(const MediumParams& m, const OperatingPoint& p) {
    json j;
    j["zeta"] = p.zeta;
    j["delta_s_mhz"] = units::rad_per_s_to_mhz(p.delta_s);
    j["omega_c_mhz"] = units::rad_per_s_to_mhz(p.omega_c);
    j["delta_cu_mhz"] = units::rad_per_s_to_mhz(p.delta_cu);
    j["two_photon_mhz"] = units::rad_per_s_to_mhz(p.two_photon_detuning());
    j["im_chi_b"] = p.im_chi_b;
    j["predicted_transmission"] = p.predicted_transmission;
    j["medium"] = medium_to_json(m);
    return j;
}

// ---------------------------------------------------------------------------

int cmd_spectrum(const CommonOpts& opts, double omega_c_mhz, double delta_c_mhz, double dmin,
                 double dmax, int points) {
    const ConfigDoc cfg = load_and_validate(opts.config_path);
    const MediumParams m = medium_from_config(cfg);
    OutputTarget target(opts.out_path);
    CsvWriter csv(target.stream());
    csv.header({"delta_s_mhz", "re_chi", "im_chi", "od", "beta_rad", "transmission"});
    for (int i = 0; i < points; ++i) {
        const double f = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
        const double delta_s_mhz = dmin + f * (dmax - dmin);
        const Drive d{units::mhz_to_rad_per_s(omega_c_mhz), units::mhz_to_rad_per_s(delta_s_mhz),
                      units::mhz_to_rad_per_s(delta_c_mhz)};
        const Susceptibility chi = susceptibility(m, d);
        const Propagation p = propagate(m, chi);
        csv.row({delta_s_mhz, chi.value.real(), chi.value.imag(), p.od, p.beta, p.transmission});
    }
    return exit_ok;
}

Drive resolve_drive(const ConfigDoc& cfg, const MediumParams& m, bool use_optimum) {
    if (use_optimum || !cfg.has_section("drive")) return analytic_optimum(m).drive();
    return drive_from_config(cfg);
}

int cmd_blockade(const CommonOpts& opts, bool use_optimum, bool bulk, double z_s_um, bool sweep,
                 int points, bool exact) {
    const ConfigDoc cfg = load_and_validate(opts.config_path);
    const MediumParams m = medium_from_config(cfg);
    const Drive d = resolve_drive(cfg, m, use_optimum);

    if (sweep) {
        OutputTarget target(opts.out_path);
        CsvWriter csv(target.stream());
        csv.header({"z_s_um", "l_b_um", "delta_od", "delta_beta_rad"});
        for (int i = 0; i < points; ++i) {
            const double z = m.length * (points > 1 ? static_cast<double>(i) / (points - 1) : 0.5);
            const BlockadeResult r = conditional_response(m, d, z);
            csv.row({units::m_to_um(z), units::m_to_um(r.l_b), r.delta_od, r.delta_beta});
        }
        return exit_ok;
    }

    const BlockadeResult r = bulk ? conditional_response_bulk(m, d)
                                  : conditional_response(m, d, z_s_um >= 0.0
                                                                   ? units::um_to_m(z_s_um)
                                                                   : m.length / 2.0);
    json j;
    j["r_b_um"] = units::m_to_um(r.r_b);
    j["r_b_im_um"] = units::m_to_um(r.r_b_im);
    j["l_b_um"] = units::m_to_um(r.l_b);
    j["delta_od"] = r.delta_od;
    j["delta_beta_rad"] = r.delta_beta;
    j["od_b"] = r.od_b;
    j["chi_u"] = {r.chi_u.real(), r.chi_u.imag()};
    j["chi_b"] = {r.chi_b.real(), r.chi_b.imag()};
    j["convention"] = bulk ? "l_b = 2 r_b" : "l_b from z_s";
    if (exact) j["delta_beta_exact_rad"] = delta_beta_exact_integral(m, d, r.z_s);
    j["drive"] = drive_to_json(d);
    emit_json(opts, j);
    return exit_ok;
}

int cmd_optimize(const CommonOpts& opts, const std::string& sweep, double lo, double hi,
                 int points, bool brute) {
    const ConfigDoc cfg = load_and_validate(opts.config_path);
    const MediumParams m = medium_from_config(cfg);

    if (sweep == "gamma_rg") {
        OutputTarget target(opts.out_path);
        CsvWriter csv(target.stream());
        csv.header({"gamma_rg_per_us", "zeta", "delta_s_mhz", "omega_c_mhz", "im_chi_b",
                    "transmission"});
        for (int i = 0; i < points; ++i) {
            const double f = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
            MediumParams mi = m;
            mi.gamma_rg = units::per_us_to_per_s(lo * std::pow(hi / lo, f));
            const double z = zeta(mi);
            if (z < 1.0) continue;  // infeasible rows are omitted
            const OperatingPoint p = analytic_optimum(mi);
            csv.row({units::per_s_to_per_us(mi.gamma_rg), z, units::rad_per_s_to_mhz(p.delta_s),
                     units::rad_per_s_to_mhz(p.omega_c), p.im_chi_b, p.predicted_transmission});
        }
        return exit_ok;
    }
    if (!sweep.empty()) throw ConfigError("unknown sweep variable: " + sweep);

    const double z = zeta(m);
    json j;
    j["zeta"] = z;
    j["feasible"] = z >= 1.0;
    if (z < 1.0) {
        j["report"] = "zeta < 1: delta_beta = pi and delta_OD = 0 cannot both be met";
        emit_json(opts, j);
        throw Infeasible("zeta < 1");
    }
    const OperatingPoint p = analytic_optimum(m);
    j.update(operating_point_json(m, p));
    const BlockadeResult b = conditional_response_bulk(m, p.drive());
    j["delta_beta_rad"] = b.delta_beta;
    j["delta_od"] = b.delta_od;
    j["od_b"] = b.od_b;
    j["density_multiplier_for_pi"] = fine_tune_density_multiplier(m, p);
    const PhaseBound bound = necessary_condition_bound(b.od_b);
    j["od_b_feasible"] = bound.feasible;
    j["max_delta_beta_rad"] = bound.max_delta_beta;
    if (brute) {
        const OperatingPoint g = brute_force_optimum(m);
        json jb;
        jb["delta_s_mhz"] = units::rad_per_s_to_mhz(g.delta_s);
        jb["omega_c_mhz"] = units::rad_per_s_to_mhz(g.omega_c);
        jb["im_chi_b"] = g.im_chi_b;
        j["brute_force"] = jb;
    }
    emit_json(opts, j);
    return exit_ok;
}

int cmd_visibility_curve(const CommonOpts& opts, double lmin, double lmax, int points) {
    if (!(lmin > 0.0) || !(lmax >= lmin) || points < 1) {
        throw ConfigError("need 0 < lmin <= lmax and points >= 1");
    }
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) {
        const double f = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
        grid[i] = lmin + f * (lmax - lmin);
    }
    const VisibilityCurve curve = visibility_curve(grid);
    OutputTarget target(opts.out_path);
    CsvWriter csv(target.stream());
    csv.header({"l_over_rb", "delta_beta_b_rad", "v_t"});
    for (const auto& p : curve.points) csv.row({p.l_over_rb, p.delta_beta_b, p.v_t});
    for (double skipped : curve.skipped) {
        std::cerr << "warning: no beta_4 = pi root for L/r_b = " << skipped << "\n";
    }
    return exit_ok;
}

TruthTableKind parse_basis(const std::string& basis) {
    if (basis == "circular") return TruthTableKind::circular;
    if (basis == "cnot") return TruthTableKind::cnot_hv_first;
    if (basis == "cnot-swapped") return TruthTableKind::cnot_hv_second;
    throw ConfigError("basis must be circular, cnot or cnot-swapped");
}

int cmd_truth_table(const CommonOpts& opts, const std::string& basis, bool noisy,
                    long long shots) {
    const ConfigDoc cfg = load_and_validate(opts.config_path);
    const TruthTableKind kind = parse_basis(basis);
    std::optional<NoiseModel> noise;
    if (noisy) noise = visibilities_from_config(cfg).noise_model();
    const XiParams xi = XiParams::ideal();

    json j;
    j["basis"] = basis;
    j["noisy"] = noisy;
    TruthTable table;
    if (shots > 0) {
        const std::uint64_t seed = require_seed(opts);
        const EfficiencyBudget budget = budget_from_config(cfg);
        const MeasuredTruthTable meas =
            truth_table_measurement(xi, noise, budget, shots, seed, kind);
        table = meas.ideal_layout;
        for (int i = 0; i < 4; ++i)
            for (int o = 0; o < 4; ++o) table.p[i][o] = meas.p[i][o];
        table.fidelity = meas.fidelity;
        j["fidelity_stderr"] = meas.fidelity_stderr;
        j["shots_per_input"] = shots;
        j["seed"] = seed;
        json c;
        for (int i = 0; i < 4; ++i) c.push_back(meas.coincidences[i]);
        j["coincidences"] = c;
    } else {
        table = truth_table(xi, kind, noise);
    }
    j["fidelity"] = table.fidelity;

    if (opts.format == "csv") {
        OutputTarget target(opts.out_path);
        CsvWriter csv(target.stream());
        csv.header({"input", "output", "probability"});
        char buf[32];
        for (int i = 0; i < 4; ++i) {
            for (int o = 0; o < 4; ++o) {
                std::snprintf(buf, sizeof buf, "%.12g", table.p[i][o]);
                csv.line({std::string(pol_name(table.inputs[i][0])) + pol_name(table.inputs[i][1]),
                          std::string(pol_name(table.outputs[o][0])) + pol_name(table.outputs[o][1]),
                          buf});
            }
        }
        return exit_ok;
    }
    json rows;
    for (int i = 0; i < 4; ++i) {
        json row;
        row["input"] =
            std::string(pol_name(table.inputs[i][0])) + pol_name(table.inputs[i][1]);
        json outs;
        for (int o = 0; o < 4; ++o) {
            outs[std::string(pol_name(table.outputs[o][0])) + pol_name(table.outputs[o][1])] =
                table.p[i][o];
        }
        row["p"] = outs;
        rows.push_back(row);
    }
    j["table"] = rows;
    emit_json(opts, j);
    return exit_ok;
}

int cmd_fidelity_bound(const CommonOpts& opts, long long mc_samples) {
    const ConfigDoc cfg = load_and_validate(opts.config_path);
    const ReferenceVisibilities vis = visibilities_from_config(cfg);
    json j;
    j["v_c"] = vis.v_c;
    j["v_t"] = vis.v_t;
    j["f_e_bound"] = entangling_fidelity_bound(vis.v_c, vis.v_t);
    const NoiseModel noise = vis.noise_model();
    j["f_e_three_visibilities"] = f_e_three_visibilities(noise.v1, noise.v2, noise.v3);
    j["v_t_identity"] = "V_t = V2 * V3; the bound takes the worst case V2 = 1";
    j["f_m"] = memory_fidelity(vis.v_c, vis.eps_r, vis.eps_l);
    if (mc_samples > 0) {
        const std::uint64_t seed = require_seed(opts);
        j["f_e_monte_carlo"] = f_e_monte_carlo(noise, mc_samples, seed, 4);
        j["mc_samples"] = mc_samples;
        j["seed"] = seed;
    }
    emit_json(opts, j);
    return exit_ok;
}

int cmd_tomography_sim(const CommonOpts& opts, long long shots, const std::string& mode_name,
                       const std::string& counts_out) {
    const ConfigDoc cfg = load_and_validate(opts.config_path);
    const std::uint64_t seed = require_seed(opts);
    const EfficiencyBudget budget = budget_from_config(cfg);
    const NoiseModel noise = visibilities_from_config(cfg).noise_model();
    const SimMode mode = mode_name == "expected" ? SimMode::expected_value : SimMode::sampling;

    const auto [rho_true, p_pair] = post_selected_density(
        XiParams::ideal(), noise, kron(pol_ket(Pol::H), pol_ket(Pol::H)));
    const auto settings = all_settings();
    const std::vector<CountRecord> records =
        simulate_counts(rho_true, budget, {settings.begin(), settings.end()}, seed, mode, shots);

    if (!counts_out.empty()) {
        OutputTarget target(counts_out);
        CsvWriter csv(target.stream());
        csv.header({"setting_q1", "setting_q2", "outcome_q1", "outcome_q2", "count"});
        char buf[32];
        for (const auto& rec : records) {
            const std::array<Pol, 2> o1{basis_plus(rec.basis_q1),
                                        pol_orthogonal(basis_plus(rec.basis_q1))};
            const std::array<Pol, 2> o2{basis_plus(rec.basis_q2),
                                        pol_orthogonal(basis_plus(rec.basis_q2))};
            int k = 0;
            for (int i = 0; i < 2; ++i) {
                for (int jj = 0; jj < 2; ++jj) {
                    std::snprintf(buf, sizeof buf, "%.12g", rec.counts[k++]);
                    csv.line({basis_name(rec.basis_q1), basis_name(rec.basis_q2), pol_name(o1[i]),
                              pol_name(o2[jj]), buf});
                }
            }
        }
    }

    const DensityMatrix4 dm = reconstruct_linear(records);
    const FidelityEstimate fe =
        fidelity_estimate(dm, psi_ideal(), mode == SimMode::sampling ? &records : nullptr, 100,
                          seed);
    json j;
    j["seed"] = seed;
    j["mode"] = mode_name;
    j["shots_per_setting"] = shots;
    json re, im;
    for (int r = 0; r < 4; ++r) {
        json row_re, row_im;
        for (int c = 0; c < 4; ++c) {
            row_re.push_back(dm.rho(r, c).real());
            row_im.push_back(dm.rho(r, c).imag());
        }
        re.push_back(row_re);
        im.push_back(row_im);
    }
    j["rho"] = {{"basis", {"RR", "RL", "LR", "LL"}},
                {"estimator", "raw linear inversion"},
                {"re", re},
                {"im", im}};
    j["min_eigenvalue"] = dm.min_eigenvalue;
    j["has_negative_eigenvalue"] = dm.has_negative_eigenvalue;
    j["fidelity_to_ideal"] = fe.f;
    j["fidelity_stderr"] = fe.stderr;
    j["witnesses_entanglement"] = fe.witnesses_entanglement;
    j["true_fidelity"] = (psi_ideal().adjoint() * rho_true * psi_ideal())(0, 0).real();
    emit_json(opts, j);
    return exit_ok;
}

int cmd_hopping(const CommonOpts& opts) {
    const ConfigDoc cfg = load_and_validate(opts.config_path);
    const HoppingInputs h = hopping_from_config(cfg);
    const HoppingComparison cmp = hopping_comparison(h.dark_time, h.tau, h.eta, h.t_single,
                                                     h.interaction_factor, h.c6_over_chi6);
    json j;
    j["decay_factor"] = cmp.decay_factor;
    j["extrapolated_efficiency"] = cmp.extrapolated_efficiency;
    j["c6_over_chi6"] = cmp.c6_over_chi6;
    emit_json(opts, j);
    return exit_ok;
}

int cmd_repro(const CommonOpts& opts, const std::string& target) {
    const ConfigDoc cfg = load_and_validate(opts.config_path);
    const PaperInputs inputs = load_paper_inputs(cfg);
    const std::uint64_t seed = opts.seed.value_or(20170901);
    const std::vector<ReproRow> rows = run_repro(inputs, target, seed);
    int failures = 0;
    for (const auto& r : rows) {
        std::printf("[%s] criterion %-2s %-52s %13.6g  in [%.6g, %.6g]  (%.2f ms)\n",
                    r.pass ? "PASS" : "FAIL", r.criterion.c_str(), r.name.c_str(), r.computed,
                    r.lo, r.hi, r.runtime_ms);
        if (!r.note.empty()) std::printf("       note: %s\n", r.note.c_str());
        if (!r.pass) ++failures;
    }
    std::printf("%d/%zu checks passed\n", static_cast<int>(rows.size()) - failures, rows.size());
    return failures == 0 ? exit_ok : exit_error;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical model of a Rydberg-EIT photon-photon quantum gate"};
    app.require_subcommand(1);

    CommonOpts opts;
    app.add_option("--config", opts.config_path, "TOML or JSON configuration file");
    app.add_option("--out", opts.out_path, "output path (default stdout)");
    app.add_option("--format", opts.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "PRNG seed (sampling commands)");

    auto* spectrum = app.add_subcommand("spectrum", "susceptibility sweep over Delta_s")->fallthrough();
    double omega_c_mhz = 0.0, delta_c_mhz = 0.0, dmin = -40.0, dmax = 10.0;
    int spectrum_points = 501;
    spectrum->add_option("--omega-c-mhz", omega_c_mhz, "coupling Rabi frequency / 2pi");
    spectrum->add_option("--delta-c-mhz", delta_c_mhz, "coupling detuning / 2pi");
    spectrum->add_option("--dmin", dmin, "scan start, MHz");
    spectrum->add_option("--dmax", dmax, "scan end, MHz");
    spectrum->add_option("--points", spectrum_points, "scan points");

    auto* blockade = app.add_subcommand("blockade", "conditional response of a stored excitation")->fallthrough();
    bool use_optimum = false, bulk = false, sweep_z = false, exact = false;
    double z_s_um = -1.0;
    int blockade_points = 101;
    blockade->add_flag("--use-optimum", use_optimum, "drive at the analytic optimum");
    blockade->add_flag("--bulk", bulk, "use the L_b = 2 r_b convention");
    blockade->add_flag("--sweep", sweep_z, "sweep the storage position (CSV)");
    blockade->add_flag("--exact", exact, "also integrate delta_beta without the step approximation");
    blockade->add_option("--z-s-um", z_s_um, "storage position (default L/2)");
    blockade->add_option("--points", blockade_points, "sweep points");

    auto* optimize = app.add_subcommand("optimize", "constrained operating point")->fallthrough();
    std::string sweep_var;
    double sweep_lo = 0.05, sweep_hi = 5.0;
    int sweep_points = 60;
    bool brute = false;
    optimize->add_option("--sweep", sweep_var, "sweep variable (gamma_rg)");
    optimize->add_option("--sweep-lo", sweep_lo, "sweep start (1/us)");
    optimize->add_option("--sweep-hi", sweep_hi, "sweep end (1/us)");
    optimize->add_option("--points", sweep_points, "sweep points");
    optimize->add_flag("--brute-force", brute, "also run the grid search");

    auto* viscurve = app.add_subcommand("visibility-curve", "V_t versus L/r_b at beta_4 = pi")->fallthrough();
    double lmin = 0.25, lmax = 10.0;
    int vis_points = 200;
    viscurve->add_option("--lmin", lmin, "smallest L/r_b");
    viscurve->add_option("--lmax", lmax, "largest L/r_b");
    viscurve->add_option("--points", vis_points, "grid points");

    auto* truth = app.add_subcommand("truth-table", "post-selected truth table")->fallthrough();
    std::string basis = "cnot";
    bool noisy = false;
    long long tt_shots = 0;
    truth->add_option("--basis", basis, "circular, cnot or cnot-swapped");
    truth->add_flag("--noisy", noisy, "apply the reference phase-noise model");
    truth->add_option("--shots", tt_shots, "simulate counting with this many shots per input");

    auto* fbound = app.add_subcommand("fidelity-bound", "entangling-fidelity bound")->fallthrough();
    long long mc_samples = 0;
    fbound->add_option("--mc-samples", mc_samples, "cross-check with a Monte-Carlo phase average");

    auto* tomo = app.add_subcommand("tomography-sim", "simulate counts and reconstruct rho")->fallthrough();
    long long tomo_shots = 10000;
    std::string tomo_mode = "sampling";
    std::string counts_out;
    tomo->add_option("--shots", tomo_shots, "shots per analysis setting");
    tomo->add_option("--mode", tomo_mode, "sampling or expected")
        ->check(CLI::IsMember({"sampling", "expected"}));
    tomo->add_option("--counts-out", counts_out, "also write the coincidence counts CSV here");

    auto* hopping = app.add_subcommand("hopping-compare", "excitation-hopping comparison")->fallthrough();

    auto* repro = app.add_subcommand("repro", "recompute reference numbers and report PASS/FAIL")->fallthrough();
    std::string repro_target = "all";
    repro->add_option("target", repro_target, "one target or 'all'");

    try {
        app.parse(argc, argv);
        if (seed_opt->count() > 0) opts.seed = seed_value;

        if (spectrum->parsed())
            return cmd_spectrum(opts, omega_c_mhz, delta_c_mhz, dmin, dmax, spectrum_points);
        if (blockade->parsed())
            return cmd_blockade(opts, use_optimum, bulk, z_s_um, sweep_z, blockade_points, exact);
        if (optimize->parsed())
            return cmd_optimize(opts, sweep_var, sweep_lo, sweep_hi, sweep_points, brute);
        if (viscurve->parsed()) return cmd_visibility_curve(opts, lmin, lmax, vis_points);
        if (truth->parsed()) return cmd_truth_table(opts, basis, noisy, tt_shots);
        if (fbound->parsed()) return cmd_fidelity_bound(opts, mc_samples);
        if (tomo->parsed()) return cmd_tomography_sim(opts, tomo_shots, tomo_mode, counts_out);
        if (hopping->parsed()) return cmd_hopping(opts);
        if (repro->parsed()) return cmd_repro(opts, repro_target);
        return exit_error;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return exit_config;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
}
