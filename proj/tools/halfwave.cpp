// Command-line front end: one process runs one scenario or one direct
// operation; composition happens at the shell level. Exit codes: 0 success,
// 2 configuration error, 3 solver non-convergence, 4 numerical corruption.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "halfwave/evolution.hpp"
#include "halfwave/field.hpp"
#include "halfwave/ground_states.hpp"
#include "halfwave/lab.hpp"
#include "halfwave/linearized.hpp"
#include "halfwave/modulation.hpp"
#include "halfwave/profiles.hpp"
#include "halfwave/snapshot.hpp"
#include "halfwave/spectral.hpp"

using namespace halfwave;

namespace {

struct GlobalOpts {
    int threads = 1;
    std::string out;
    std::string config;
    std::uint64_t seed = 0;
    std::string log_level = "info";
};

void apply_log_level(const GlobalOpts& g) {
    if (g.log_level == "quiet") {
        warnings::set_handler(+[](const std::string&) {});
    } else {
        warnings::set_handler(+[](const std::string& msg) {
            std::fprintf(stderr, "[warn] %s\n", msg.c_str());
        });
    }
}

void info(const GlobalOpts& g, const std::string& msg) {
    if (g.log_level != "quiet") std::fprintf(stderr, "%s\n", msg.c_str());
}

int run_app(int argc, char** argv) {
    CLI::App app{"half-wave equation laboratory"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--threads", g.threads, "worker threads (orchestration is single-threaded)")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output path/directory override");
    app.add_option("--config", g.config, "scenario config file");
    app.add_option("--seed", g.seed, "seed for randomized test fields");
    app.add_option("--log-level", g.log_level, "quiet | info | debug")
        ->check(CLI::IsMember({"quiet", "info", "debug"}));

    // shared grid/solver flags
    std::size_t n = 4096;
    double box = 256.0, tol = 1e-10;
    auto add_grid = [&](CLI::App* c) {
        c->add_option("--n", n, "grid points (power of two)");
        c->add_option("--box", box, "box length");
        c->add_option("--tol", tol, "solver tolerance");
    };

    // ground-state
    auto* cs = app.add_subcommand("ground-state", "solve the solitary-wave profile");
    add_grid(cs);
    std::string gs_out = "ground_state.hwf";
    cs->add_option("--out", gs_out, "snapshot output path");
    cs->callback([&] {
        apply_log_level(g);
        GroundState gs = solve_ground_state(make_grid(n, box), {tol, 500});
        save_snapshot(g.out.empty() ? gs_out : g.out, gs.q, 0.0);
        info(g, "mass " + std::to_string(gs.mass) + ", residual " +
                    std::to_string(gs.residual_norm) + ", " +
                    std::to_string(gs.iterations) + " iterations");
    });

    // mass-curve
    auto* cm = app.add_subcommand("mass-curve", "traveling-wave mass along a velocity sweep");
    add_grid(cm);
    double vmax = 0.9;
    int steps = 9;
    std::string mc_csv = "mass_curve.csv";
    cm->add_option("--vmax", vmax, "largest velocity (<= 0.95)");
    cm->add_option("--steps", steps, "sweep steps beyond v = 0");
    cm->add_option("--csv", mc_csv, "CSV output path");
    cm->callback([&] {
        apply_log_level(g);
        std::vector<double> vs;
        for (int j = 0; j <= steps; ++j) vs.push_back(vmax * j / steps);
        std::vector<MassCurveRow> rows = mass_curve(make_grid(n, box), vs, {tol, 500});
        std::vector<std::vector<double>> out;
        for (const auto& r : rows)
            out.push_back({r.v, r.mass, r.cv, r.residual, r.pohozaev_defect,
                           static_cast<double>(r.iterations)});
        emit_csv(g.out.empty() ? mc_csv : g.out,
                 {"v", "mass", "cv", "residual", "pohozaev_defect", "iterations"}, out);
    });

    // spectrum
    auto* cp = app.add_subcommand("spectrum", "lowest eigenpairs of a linearized block");
    add_grid(cp);
    std::string op_name = "plus";
    int k = 8;
    std::string sp_csv = "spectrum.csv";
    cp->add_option("--op", op_name, "plus | minus")->check(CLI::IsMember({"plus", "minus"}));
    cp->add_option("-k,--k", k, "number of eigenpairs");
    cp->add_option("--csv", sp_csv, "CSV output path");
    cp->callback([&] {
        apply_log_level(g);
        GroundState gs = solve_ground_state(make_grid(n, box), {tol, 500});
        LinearizedOperator op{op_name == "plus" ? OperatorKind::plus : OperatorKind::minus,
                              gs.q};
        SpectrumReport rep = spectrum_report(op, k);
        ComplexField dq = derivative(gs.q);
        const double nq = norm_l2(gs.q), ndq = norm_l2(dq);
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < rep.lowest.size(); ++i) {
            const double ne = norm_l2(rep.lowest[i].field);
            out.push_back({static_cast<double>(i), rep.lowest[i].value, rep.drift,
                           std::abs(inner(rep.lowest[i].field, gs.q)) / (ne * nq),
                           std::abs(inner(rep.lowest[i].field, dq)) / (ne * ndq)});
        }
        emit_csv(g.out.empty() ? sp_csv : g.out,
                 {"index", "eigenvalue", "drift_estimate", "overlap_Q", "overlap_dQ"}, out);
    });

    // profiles
    auto* cf = app.add_subcommand("profiles", "corrector-chain build and residual sweeps");
    bool do_build = false, do_sweep = false;
    std::size_t chain_n = 65536;
    double chain_box = 2048.0;
    std::string axis = "b", pr_out = "profiles", pr_csv = "residual_sweep.csv";
    cf->add_flag("--build", do_build, "build the chain and write the field set");
    cf->add_flag("--residual-sweep", do_sweep, "sweep the profile-equation residual");
    cf->add_option("--chain-n", chain_n, "chain grid points");
    cf->add_option("--chain-box", chain_box, "chain box length");
    cf->add_option("--axis", axis, "sweep axis: b | v")->check(CLI::IsMember({"b", "v"}));
    cf->add_option("--out", pr_out, "profile output directory");
    cf->add_option("--csv", pr_csv, "sweep CSV output path");
    std::size_t restrict_n = 0;
    double restrict_box = 0.0;
    cf->add_option("--restrict-n", restrict_n, "restrict the built set to this grid size");
    cf->add_option("--restrict-box", restrict_box, "restrict the built set to this box");
    cf->callback([&] {
        apply_log_level(g);
        if (do_build == do_sweep)
            throw ConfigError("profiles: pass exactly one of --build / --residual-sweep");
        ProfileSet ps =
            build_profiles(solve_ground_state(make_grid(chain_n, chain_box), {tol, 500}));
        if (do_build) {
            if (restrict_n != 0 || restrict_box != 0.0)
                ps = restrict_profiles(ps, make_grid(restrict_n, restrict_box));
            save_profile_set(ps, g.out.empty() ? pr_out : g.out);
            info(g, "e1 " + std::to_string(ps.e1) + ", p1 " + std::to_string(ps.p1));
            return;
        }
        std::vector<std::vector<double>> out;
        for (const double p : {0.02, 0.04, 0.08, 0.16}) {
            ProfileResidual r = profile_residual(
                ps, axis == "b" ? ProfileParams{p, 0.0} : ProfileParams{0.0, p});
            out.push_back({p, norm_l2(r.psi), r.h1_norm});
        }
        emit_csv(g.out.empty() ? pr_csv : g.out, {"param", "psi_l2", "psi_h1"}, out);
    });

    // evolve
    auto* ce = app.add_subcommand("evolve", "integrate the flow and persist the trajectory");
    add_grid(ce);
    std::string init = "soliton", traj_dir = "traj", ev_csv = "conserved.csv";
    double t0 = 0.0, t1 = 1.0, dt = 1e-3, trigger = 0.0;
    std::size_t stride = 100;
    ce->add_option("--init", init, "initial data: snapshot path or builtin 'soliton'");
    ce->add_option("--t0", t0, "start time");
    ce->add_option("--t1", t1, "end time");
    ce->add_option("--dt", dt, "base step");
    ce->add_option("--stride", stride, "steps between snapshots");
    ce->add_option("--trigger", trigger, "regrid trigger in grid spacings (0 disables)");
    ce->add_option("--snapshots", traj_dir, "trajectory output directory");
    ce->add_option("--csv", ev_csv, "conserved-series CSV path");
    ce->callback([&] {
        apply_log_level(g);
        ComplexField u0 = init == "soliton"
                              ? solve_ground_state(make_grid(n, box), {tol, 500}).q
                              : load_snapshot(init).field;
        EvolutionConfig cfg;
        cfg.dt = dt;
        cfg.t_begin = t0;
        cfg.t_end = t1;
        cfg.snapshot_stride = stride;
        cfg.rescale_trigger = trigger;
        Trajectory traj = evolve(u0, cfg);
        save_trajectory(traj, g.out.empty() ? traj_dir : g.out);
        std::vector<std::vector<double>> out;
        for (const auto& [t, c] : traj.conserved_series)
            out.push_back({t, c.mass, c.energy, c.momentum});
        emit_csv(ev_csv, {"t", "mass", "energy", "momentum"}, out);
    });

    // track
    auto* ct = app.add_subcommand("track", "modulation decomposition along a trajectory");
    std::string tr_traj = "traj", tr_profiles = "profiles", tr_csv = "track.csv";
    ct->add_option("--traj", tr_traj, "trajectory directory");
    ct->add_option("--profiles", tr_profiles, "profile-set directory");
    ct->add_option("--csv", tr_csv, "CSV output path");
    ct->callback([&] {
        apply_log_level(g);
        Trajectory traj = load_trajectory(tr_traj);
        ProfileSet ps = load_profile_set(tr_profiles);
        ModulationSeries series = track(traj, ps);
        emit_track_csv(series, g.out.empty() ? tr_csv : g.out);
        info(g, "tracked " + std::to_string(series.valid_count) + "/" +
                    std::to_string(traj.snapshots.size()) + " snapshots");
    });

    // virial
    auto* cv = app.add_subcommand("virial", "localized virial diagnostic along a trajectory");
    std::string vi_traj = "traj", vi_profiles = "profiles", vi_csv = "virial.csv";
    double A = 100.0;
    cv->add_option("--traj", vi_traj, "trajectory directory");
    cv->add_option("--profiles", vi_profiles, "profile-set directory");
    cv->add_option("--A", A, "localization radius");
    cv->add_option("--csv", vi_csv, "CSV output path");
    cv->callback([&] {
        apply_log_level(g);
        Trajectory traj = load_trajectory(vi_traj);
        ProfileSet ps = load_profile_set(vi_profiles);
        ModulationSeries series = track(traj, ps);
        VirialConfig vcfg;
        vcfg.A = A;
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < series.valid_count; ++i) {
            const ModulationState& st = series.states[i];
            // evaluated on the rescaled residual against the assembled profile
            ComplexField qp = assemble_qp(ps, {st.b, st.v});
            ModulationState frame = st;
            frame.alpha = 0.0;  // eps is already centered in the rescaled frame
            out.push_back({series.t[i], series.s[i], st.lambda, st.b,
                           virial_value(st.eps, qp, frame, vcfg)});
        }
        emit_csv(g.out.empty() ? vi_csv : g.out, {"t", "s", "lambda", "b", "virial"}, out);
    });

    // run (scenario config)
    auto* cr = app.add_subcommand("run", "execute a scenario config end-to-end");
    cr->callback([&] {
        apply_log_level(g);
        if (g.config.empty()) throw ConfigError("run: --config <file> is required");
        ScenarioConfig cfg = load_config(g.config);
        if (!g.out.empty()) cfg.out_dir = g.out;
        if (g.seed != 0) cfg.seed = g.seed;
        RunResult res = run(cfg);
        info(g, "wrote " + res.manifest_path + " (" + std::to_string(res.files.size()) +
                    " files, " + std::to_string(res.wall_seconds) + " s)");
    });

    // let global flags (--config, --out, ...) appear after the subcommand too
    for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
        sc->fallthrough();

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_app(argc, argv);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    } catch (const NumericsError& e) {
        std::fprintf(stderr, "numerics error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
