#include "halfwave/lab.hpp"

#include <zlib.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "halfwave/ground_states.hpp"
#include "halfwave/linearized.hpp"
#include "halfwave/snapshot.hpp"
#include "halfwave/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace halfwave {

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s, int line) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("config line " + std::to_string(line) + ": bad number '" + s + "'");
    return x;
}

long long parse_int(const std::string& s, int line) {
    char* end = nullptr;
    const long long x = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw ConfigError("config line " + std::to_string(line) + ": bad integer '" + s + "'");
    return x;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string crc32_of_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read file for checksum: " + p.string());
    uLong crc = crc32(0L, Z_NULL, 0);
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        crc = crc32(crc, reinterpret_cast<const Bytef*>(buf),
                    static_cast<uInt>(in.gcount()));
    char out[16];
    std::snprintf(out, sizeof out, "%08lx", static_cast<unsigned long>(crc));
    return out;
}

// scenario runners accumulate schema and scalar extras for the manifest
struct RunScratch {
    fs::path dir;
    json schemas = json::object();
    json extras = json::object();
};

void write_csv_with_schema(RunScratch& rs, const std::string& name,
                           const std::vector<std::string>& header,
                           const std::vector<std::vector<double>>& rows) {
    emit_csv((rs.dir / name).string(), header, rows);
    rs.schemas[name] = header;
}

SolverOpts solver_opts(const ScenarioConfig& cfg) {
    return SolverOpts{cfg.tolerance, cfg.max_iterations};
}

void run_ground_state(const ScenarioConfig& cfg, RunScratch& rs) {
    GroundState gs = solve_ground_state(make_grid(cfg.n, cfg.box), solver_opts(cfg));
    save_snapshot((rs.dir / "ground_state.hwf").string(), gs.q, 0.0);
    write_csv_with_schema(
        rs, "ground_state.csv",
        {"n", "box", "mass", "residual", "tail_exponent", "iterations"},
        {{static_cast<double>(cfg.n), cfg.box, gs.mass, gs.residual_norm,
          gs.tail_exponent, static_cast<double>(gs.iterations)}});
    rs.extras["mass"] = gs.mass;
    rs.extras["residual"] = gs.residual_norm;
}

void run_mass_curve(const ScenarioConfig& cfg, RunScratch& rs) {
    std::vector<double> velocities;
    for (int j = 0; j <= cfg.steps; ++j)
        velocities.push_back(cfg.vmax * static_cast<double>(j) / cfg.steps);
    std::vector<MassCurveRow> rows =
        mass_curve(make_grid(cfg.n, cfg.box), velocities, solver_opts(cfg));
    std::vector<std::vector<double>> out;
    bool all_ok = true, monotone = true;
    for (const MassCurveRow& r : rows) {
        out.push_back({r.v, r.mass, r.cv, r.residual, r.pohozaev_defect,
                       static_cast<double>(r.iterations)});
        all_ok = all_ok && r.ok;
        if (r.v > 0.0) monotone = monotone && r.monotone_ok;
    }
    write_csv_with_schema(rs, "mass_curve.csv",
                          {"v", "mass", "cv", "residual", "pohozaev_defect", "iterations"},
                          out);
    rs.extras["all_converged"] = all_ok;
    rs.extras["mass_monotone"] = monotone;
}

void run_spectrum(const ScenarioConfig& cfg, RunScratch& rs) {
    GroundState gs = solve_ground_state(make_grid(cfg.n, cfg.box), solver_opts(cfg));
    const OperatorKind kind = cfg.op == "plus" ? OperatorKind::plus : OperatorKind::minus;
    LinearizedOperator op{kind, gs.q};
    SpectrumReport rep = spectrum_report(op, cfg.k);
    ComplexField dq = derivative(gs.q);
    const double nq = norm_l2(gs.q), ndq = norm_l2(dq);
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < rep.lowest.size(); ++i) {
        const EigenPair& ep = rep.lowest[i];
        const double ne = norm_l2(ep.field);
        out.push_back({static_cast<double>(i), ep.value, rep.drift,
                       std::abs(inner(ep.field, gs.q)) / (ne * nq),
                       std::abs(inner(ep.field, dq)) / (ne * ndq)});
    }
    write_csv_with_schema(rs, "spectrum.csv",
                          {"index", "eigenvalue", "drift_estimate", "overlap_Q", "overlap_dQ"},
                          out);
    rs.extras["negative_count"] = rep.negative_count;
    rs.extras["kernel_tol"] = rep.kernel_tol;
}

ProfileSet build_chain(const ScenarioConfig& cfg) {
    GroundState gs = solve_ground_state(make_grid(cfg.chain_n, cfg.chain_box),
                                        solver_opts(cfg));
    return build_profiles(gs);
}

void run_profiles(const ScenarioConfig& cfg, RunScratch& rs) {
    ProfileSet ps = build_chain(cfg);
    // when the working grid differs from the chain grid, persist the
    // restriction (the set a tracker on that grid needs)
    if (cfg.n != cfg.chain_n || cfg.box != cfg.chain_box)
        ps = restrict_profiles(ps, make_grid(cfg.n, cfg.box));
    save_profile_set(ps, rs.dir.string());
    rs.extras["e1"] = ps.e1;
    rs.extras["p1"] = ps.p1;
    rs.extras["grid_n"] = ps.q.q.grid.n;
    rs.extras["grid_box"] = ps.q.q.grid.box_length;
}

void run_residual_sweep(const ScenarioConfig& cfg, RunScratch& rs) {
    ProfileSet ps = build_chain(cfg);
    std::vector<std::vector<double>> out;
    std::vector<double> params, norms;
    for (int i = 0; i < cfg.sweep_count; ++i) {
        const double frac = cfg.sweep_count == 1
                                ? 0.0
                                : static_cast<double>(i) / (cfg.sweep_count - 1);
        const double p = cfg.sweep_min * std::pow(cfg.sweep_max / cfg.sweep_min, frac);
        ProfileParams pp = cfg.axis == "b" ? ProfileParams{p, 0.0} : ProfileParams{0.0, p};
        ProfileResidual res = profile_residual(ps, pp);
        const double l2 = norm_l2(res.psi);
        out.push_back({p, l2, res.h1_norm});
        params.push_back(p);
        norms.push_back(l2);
    }
    write_csv_with_schema(rs, "residual_sweep.csv", {"param", "psi_l2", "psi_h1"}, out);
    // least-squares log-log slope across the ladder
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double lx = std::log(params[i]), ly = std::log(norms[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(params.size());
    rs.extras["fitted_order"] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rs.extras["axis"] = cfg.axis;
}

void run_blowup(const ScenarioConfig& cfg, RunScratch& rs) {
    ProfileSet chain = build_chain(cfg);
    ProfileSet pr = restrict_profiles(chain, make_grid(cfg.n, cfg.box));

    const double c0sq = pr.e1 / cfg.E0;
    const double d0 = cfg.P0 / pr.p1;
    ComplexField u0 =
        minimal_mass_initial_data(pr, cfg.t_n, cfg.E0, cfg.P0, cfg.gamma0, cfg.x0);

    EvolutionConfig ec;
    ec.dt = cfg.dt;
    ec.t_begin = cfg.t_n;
    ec.t_end = cfg.t_end;
    ec.rescale_trigger = cfg.rescale_trigger;
    ec.snapshot_stride = cfg.snapshot_stride;
    Trajectory traj = evolve(u0, ec);
    save_trajectory(traj, (rs.dir / "traj").string());

    // construction parameters seed the tracker at the first snapshot
    ModulationState guess;
    guess.lambda = cfg.t_n * cfg.t_n / (4.0 * c0sq);
    guess.alpha = cfg.x0;
    guess.gamma = cfg.gamma0 - 4.0 * c0sq / cfg.t_n;
    guess.b = -cfg.t_n / (2.0 * c0sq);
    guess.v = d0 * cfg.t_n * cfg.t_n / (2.0 * std::sqrt(c0sq));
    ModulationSeries series = track(traj, pr, guess);
    emit_track_csv(series, (rs.dir / "series.csv").string());
    rs.schemas["series.csv"] = {"t", "s", "lambda", "alpha", "gamma", "b", "v",
                                "eps_L2", "eps_H12", "mod1", "mod2", "mod3",
                                "mod4", "mod5", "mod_error"};

    std::vector<std::vector<double>> cons;
    for (const auto& [t, c] : traj.conserved_series)
        cons.push_back({t, c.mass, c.energy, c.momentum});
    write_csv_with_schema(rs, "conserved.csv", {"t", "mass", "energy", "momentum"}, cons);

    rs.extras["e1"] = pr.e1;
    rs.extras["p1"] = pr.p1;
    rs.extras["C0"] = std::sqrt(c0sq);
    rs.extras["D0"] = d0;
    rs.extras["tracked"] = series.valid_count;
    rs.extras["snapshots"] = traj.snapshots.size();
    rs.extras["regrids"] = traj.events.size();
    if (series.valid_count > 0) {
        rs.extras["lambda_first"] = series.states.front().lambda;
        rs.extras["lambda_last"] = series.states[series.valid_count - 1].lambda;
    }
}

void run_soliton_check(const ScenarioConfig& cfg, RunScratch& rs) {
    GroundState gs = solve_ground_state(make_grid(cfg.n, cfg.box), solver_opts(cfg));
    EvolutionConfig ec;
    ec.dt = cfg.dt;
    ec.t_begin = 0.0;
    ec.t_end = cfg.t1;
    ec.snapshot_stride = cfg.snapshot_stride;
    Trajectory traj = evolve(gs.q, ec);
    const ConservedTriple c0 = conserved(gs.q);
    const double nq = norm_l2(gs.q);
    std::vector<std::vector<double>> out;
    double max_drift = 0.0;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const auto& [t, u] = traj.snapshots[i];
        double d2 = 0.0;
        const cplx phase = std::polar(1.0, t);
        for (std::size_t j = 0; j < u.grid.n; ++j)
            d2 += std::norm(u.values[j] - phase * gs.q.values[j]);
        const double drift = std::sqrt(d2 * u.grid.spacing()) / nq;
        const ConservedTriple c = conserved(u);
        out.push_back({t, drift, c.mass - c0.mass, c.energy - c0.energy,
                       c.momentum - c0.momentum});
        max_drift = std::max(max_drift, drift);
    }
    write_csv_with_schema(rs, "soliton_check.csv",
                          {"t", "drift", "mass_drift", "energy_drift", "momentum_drift"},
                          out);
    rs.extras["max_drift"] = max_drift;
}

using KeySetter = std::function<void(ScenarioConfig&, const std::string&, int)>;

const std::map<std::string, KeySetter>& key_table() {
    static const std::map<std::string, KeySetter> table = {
        {"scenario", [](ScenarioConfig& c, const std::string& v, int) {
             c.scenario = scenario_from_name(v);
         }},
        {"n", [](ScenarioConfig& c, const std::string& v, int l) {
             c.n = static_cast<std::size_t>(parse_int(v, l));
         }},
        {"box", [](ScenarioConfig& c, const std::string& v, int l) {
             c.box = parse_double(v, l);
         }},
        {"tolerance", [](ScenarioConfig& c, const std::string& v, int l) {
             c.tolerance = parse_double(v, l);
         }},
        {"max_iterations", [](ScenarioConfig& c, const std::string& v, int l) {
             c.max_iterations = static_cast<int>(parse_int(v, l));
         }},
        {"vmax", [](ScenarioConfig& c, const std::string& v, int l) {
             c.vmax = parse_double(v, l);
         }},
        {"steps", [](ScenarioConfig& c, const std::string& v, int l) {
             c.steps = static_cast<int>(parse_int(v, l));
         }},
        {"op", [](ScenarioConfig& c, const std::string& v, int) { c.op = v; }},
        {"k", [](ScenarioConfig& c, const std::string& v, int l) {
             c.k = static_cast<int>(parse_int(v, l));
         }},
        {"axis", [](ScenarioConfig& c, const std::string& v, int) { c.axis = v; }},
        {"sweep_min", [](ScenarioConfig& c, const std::string& v, int l) {
             c.sweep_min = parse_double(v, l);
         }},
        {"sweep_max", [](ScenarioConfig& c, const std::string& v, int l) {
             c.sweep_max = parse_double(v, l);
         }},
        {"sweep_count", [](ScenarioConfig& c, const std::string& v, int l) {
             c.sweep_count = static_cast<int>(parse_int(v, l));
         }},
        {"chain_n", [](ScenarioConfig& c, const std::string& v, int l) {
             c.chain_n = static_cast<std::size_t>(parse_int(v, l));
         }},
        {"chain_box", [](ScenarioConfig& c, const std::string& v, int l) {
             c.chain_box = parse_double(v, l);
         }},
        {"E0", [](ScenarioConfig& c, const std::string& v, int l) {
             c.E0 = parse_double(v, l);
         }},
        {"P0", [](ScenarioConfig& c, const std::string& v, int l) {
             c.P0 = parse_double(v, l);
         }},
        {"gamma0", [](ScenarioConfig& c, const std::string& v, int l) {
             c.gamma0 = parse_double(v, l);
         }},
        {"x0", [](ScenarioConfig& c, const std::string& v, int l) {
             c.x0 = parse_double(v, l);
         }},
        {"t_n", [](ScenarioConfig& c, const std::string& v, int l) {
             c.t_n = parse_double(v, l);
         }},
        {"dt", [](ScenarioConfig& c, const std::string& v, int l) {
             c.dt = parse_double(v, l);
         }},
        {"t_end", [](ScenarioConfig& c, const std::string& v, int l) {
             c.t_end = parse_double(v, l);
         }},
        {"snapshot_stride", [](ScenarioConfig& c, const std::string& v, int l) {
             c.snapshot_stride = static_cast<std::size_t>(parse_int(v, l));
         }},
        {"rescale_trigger", [](ScenarioConfig& c, const std::string& v, int l) {
             c.rescale_trigger = parse_double(v, l);
         }},
        {"t1", [](ScenarioConfig& c, const std::string& v, int l) {
             c.t1 = parse_double(v, l);
         }},
        {"out_dir", [](ScenarioConfig& c, const std::string& v, int) { c.out_dir = v; }},
        {"seed", [](ScenarioConfig& c, const std::string& v, int l) {
             c.seed = static_cast<std::uint64_t>(parse_int(v, l));
         }},
    };
    return table;
}

}  // namespace

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::ground_state: return "ground_state";
        case Scenario::mass_curve: return "mass_curve";
        case Scenario::spectrum: return "spectrum";
        case Scenario::profiles: return "profiles";
        case Scenario::residual_sweep: return "residual_sweep";
        case Scenario::blowup_run: return "blowup_run";
        case Scenario::soliton_check: return "soliton_check";
    }
    throw ConfigError("unknown scenario enum value");
}

Scenario scenario_from_name(const std::string& name) {
    for (Scenario s : {Scenario::ground_state, Scenario::mass_curve, Scenario::spectrum,
                       Scenario::profiles, Scenario::residual_sweep, Scenario::blowup_run,
                       Scenario::soliton_check})
        if (name == scenario_name(s)) return s;
    throw ConfigError("unknown scenario '" + name + "'");
}

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line) +
                              ": expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        auto it = key_table().find(key);
        if (it == key_table().end())
            throw ConfigError("config line " + std::to_string(line) + ": unknown key '" +
                              key + "'");
        it->second(cfg, value, line);
    }
    validate_config(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "scenario = " << scenario_name(cfg.scenario) << "\n";
    out << "n = " << cfg.n << "\n";
    out << "box = " << fmt17(cfg.box) << "\n";
    out << "tolerance = " << fmt17(cfg.tolerance) << "\n";
    out << "max_iterations = " << cfg.max_iterations << "\n";
    out << "vmax = " << fmt17(cfg.vmax) << "\n";
    out << "steps = " << cfg.steps << "\n";
    out << "op = " << cfg.op << "\n";
    out << "k = " << cfg.k << "\n";
    out << "axis = " << cfg.axis << "\n";
    out << "sweep_min = " << fmt17(cfg.sweep_min) << "\n";
    out << "sweep_max = " << fmt17(cfg.sweep_max) << "\n";
    out << "sweep_count = " << cfg.sweep_count << "\n";
    out << "chain_n = " << cfg.chain_n << "\n";
    out << "chain_box = " << fmt17(cfg.chain_box) << "\n";
    out << "E0 = " << fmt17(cfg.E0) << "\n";
    out << "P0 = " << fmt17(cfg.P0) << "\n";
    out << "gamma0 = " << fmt17(cfg.gamma0) << "\n";
    out << "x0 = " << fmt17(cfg.x0) << "\n";
    out << "t_n = " << fmt17(cfg.t_n) << "\n";
    out << "dt = " << fmt17(cfg.dt) << "\n";
    out << "t_end = " << fmt17(cfg.t_end) << "\n";
    out << "snapshot_stride = " << cfg.snapshot_stride << "\n";
    out << "rescale_trigger = " << fmt17(cfg.rescale_trigger) << "\n";
    out << "t1 = " << fmt17(cfg.t1) << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

void validate_config(const ScenarioConfig& cfg) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("config field '" + field + "': " + why);
    };
    auto power_of_two = [](std::size_t n) { return n >= 16 && (n & (n - 1)) == 0; };
    if (!power_of_two(cfg.n)) fail("n", "must be a power of two >= 16");
    if (!(cfg.box > 0.0)) fail("box", "must be positive");
    if (!(cfg.tolerance > 0.0)) fail("tolerance", "must be positive");
    if (cfg.max_iterations <= 0) fail("max_iterations", "must be positive");
    if (!(cfg.vmax >= 0.0 && cfg.vmax <= 0.95)) fail("vmax", "must lie in [0, 0.95]");
    if (cfg.steps < 1) fail("steps", "must be >= 1");
    if (cfg.op != "plus" && cfg.op != "minus") fail("op", "must be 'plus' or 'minus'");
    if (cfg.k < 1) fail("k", "must be >= 1");
    if (cfg.axis != "b" && cfg.axis != "v") fail("axis", "must be 'b' or 'v'");
    if (!(cfg.sweep_min > 0.0)) fail("sweep_min", "must be positive");
    if (!(cfg.sweep_max >= cfg.sweep_min)) fail("sweep_max", "must be >= sweep_min");
    if (cfg.sweep_count < 2) fail("sweep_count", "must be >= 2");
    if (!power_of_two(cfg.chain_n)) fail("chain_n", "must be a power of two >= 16");
    if (!(cfg.chain_box > 0.0)) fail("chain_box", "must be positive");
    if (!(cfg.E0 > 0.0)) fail("E0", "must be positive");
    if (!(cfg.t_n < 0.0)) fail("t_n", "must be negative");
    if (!(cfg.dt > 0.0)) fail("dt", "must be positive");
    if (cfg.scenario == Scenario::blowup_run &&
        !(cfg.t_end > cfg.t_n && cfg.t_end <= 0.0))
        fail("t_end", "must lie in (t_n, 0]");
    if (cfg.snapshot_stride < 1) fail("snapshot_stride", "must be >= 1");
    if (cfg.rescale_trigger < 0.0) fail("rescale_trigger", "must be >= 0");
    if (!(cfg.t1 > 0.0)) fail("t1", "must be positive");
    if (cfg.out_dir.empty()) fail("out_dir", "must be non-empty");
}

void emit_csv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary: fixed '\n' endings
    if (!out) throw ConfigError("cannot open CSV for writing: " + path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw ConfigError("CSV row width does not match header: " + path);
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << fmt17(row[i]);
        out << "\n";
    }
    if (!out) throw NumericsError("short write while emitting CSV: " + path);
}

RunResult run(const ScenarioConfig& cfg) {
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    RunScratch rs;
    rs.dir = cfg.out_dir;
    fs::create_directories(rs.dir);

    switch (cfg.scenario) {
        case Scenario::ground_state: run_ground_state(cfg, rs); break;
        case Scenario::mass_curve: run_mass_curve(cfg, rs); break;
        case Scenario::spectrum: run_spectrum(cfg, rs); break;
        case Scenario::profiles: run_profiles(cfg, rs); break;
        case Scenario::residual_sweep: run_residual_sweep(cfg, rs); break;
        case Scenario::blowup_run: run_blowup(cfg, rs); break;
        case Scenario::soliton_check: run_soliton_check(cfg, rs); break;
    }

    // every file in the output directory is listed, whatever produced it
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(rs.dir))
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    json manifest;
    manifest["version"] = kVersion;
    manifest["scenario"] = scenario_name(cfg.scenario);
    {
        json jcfg = json::object();
        std::istringstream in(serialize_config(cfg));
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            jcfg[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        manifest["config"] = jcfg;
    }
    manifest["csv_schemas"] = rs.schemas;
    manifest["extras"] = rs.extras;
    json jfiles = json::array();
    RunResult result;
    for (const fs::path& p : files) {
        json jf;
        jf["name"] = fs::relative(p, rs.dir).generic_string();
        jf["bytes"] = fs::file_size(p);
        jf["crc32"] = crc32_of_file(p);
        jfiles.push_back(jf);
        result.files.push_back(jf["name"]);
    }
    manifest["files"] = jfiles;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest["wall_clock_seconds"] = result.wall_seconds;

    result.manifest_path = (rs.dir / "manifest.json").string();
    std::ofstream out(result.manifest_path, std::ios::binary);
    out << manifest.dump(2) << "\n";
    if (!out) throw NumericsError("short write while saving manifest");
    return result;
}

namespace {

const std::vector<std::pair<const char*, ComplexField ProfileSet::*>>& profile_members() {
    static const std::vector<std::pair<const char*, ComplexField ProfileSet::*>> m = {
        {"s1", &ProfileSet::s1},         {"g1", &ProfileSet::g1},
        {"t2", &ProfileSet::t2},         {"h2", &ProfileSet::h2},
        {"f2", &ProfileSet::f2},         {"r30", &ProfileSet::r30},
        {"r21", &ProfileSet::r21},       {"r40", &ProfileSet::r40},
        {"rho1", &ProfileSet::rho1},     {"rho2_b", &ProfileSet::rho2_b},
        {"rho2_v", &ProfileSet::rho2_v},
    };
    return m;
}

}  // namespace

void save_profile_set(const ProfileSet& ps, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path d = dir;
    save_snapshot((d / "q.hwf").string(), ps.q.q, 0.0);
    for (const auto& [name, member] : profile_members())
        save_snapshot((d / (std::string(name) + ".hwf")).string(), ps.*member, 0.0);
    json meta;
    meta["e1"] = ps.e1;
    meta["p1"] = ps.p1;
    meta["ground_state"] = {{"mass", ps.q.mass},
                            {"residual_norm", ps.q.residual_norm},
                            {"tail_exponent", ps.q.tail_exponent},
                            {"iterations", ps.q.iterations}};
    json ids = json::array();
    for (const auto& ir : ps.identity_residuals)
        ids.push_back({{"name", ir.name}, {"value", ir.value}});
    meta["identity_residuals"] = ids;
    std::ofstream out(d / "profiles.json", std::ios::binary);
    out << meta.dump(2) << "\n";
    if (!out) throw NumericsError("short write while saving profile metadata");
}

ProfileSet load_profile_set(const std::string& dir) {
    const fs::path d = dir;
    std::ifstream in(d / "profiles.json");
    if (!in) throw ConfigError("not a profile directory (missing profiles.json): " + dir);
    json meta = json::parse(in);
    ProfileSet ps;
    Snapshot q = load_snapshot((d / "q.hwf").string());
    ps.q.q = q.field;
    ps.q.mass = meta["ground_state"]["mass"];
    ps.q.residual_norm = meta["ground_state"]["residual_norm"];
    ps.q.tail_exponent = meta["ground_state"]["tail_exponent"];
    ps.q.iterations = meta["ground_state"]["iterations"];
    for (const auto& [name, member] : profile_members()) {
        Snapshot s = load_snapshot((d / (std::string(name) + ".hwf")).string());
        if (s.field.grid.n != ps.q.q.grid.n ||
            s.field.grid.box_length != ps.q.q.grid.box_length)
            throw ConfigError("profile directory mixes grids: " + dir);
        ps.*member = s.field;
    }
    ps.e1 = meta["e1"];
    ps.p1 = meta["p1"];
    for (const auto& ir : meta["identity_residuals"])
        ps.identity_residuals.push_back({ir["name"], ir["value"]});
    return ps;
}

void save_trajectory(const Trajectory& traj, const std::string& dir) {
    fs::create_directories(dir);
    const fs::path d = dir;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.hwf", i);
        save_snapshot((d / name).string(), traj.snapshots[i].second,
                      traj.snapshots[i].first);
    }
    json meta;
    meta["count"] = traj.snapshots.size();
    meta["frame_scales"] = traj.frame_scales;
    meta["frame_shifts"] = traj.frame_shifts;
    meta["accumulated_scale"] = traj.accumulated_scale;
    meta["accumulated_shift"] = traj.accumulated_shift;
    meta["halted"] = traj.halted;
    json events = json::array();
    for (const EvolutionEvent& e : traj.events)
        events.push_back({{"kind", e.kind == EvolutionEvent::Kind::regrid ? "regrid"
                                                                          : "blowup_halt"},
                          {"time", e.time},
                          {"scale", e.scale},
                          {"detail", e.detail}});
    meta["events"] = events;
    json cons = json::array();
    for (const auto& [t, c] : traj.conserved_series)
        cons.push_back({t, c.mass, c.energy, c.momentum});
    meta["conserved"] = cons;
    std::ofstream out(d / "trajectory.json", std::ios::binary);
    out << meta.dump(2) << "\n";
    if (!out) throw NumericsError("short write while saving trajectory metadata");
}

Trajectory load_trajectory(const std::string& dir) {
    const fs::path d = dir;
    std::ifstream in(d / "trajectory.json");
    if (!in) throw ConfigError("not a trajectory directory (missing trajectory.json): " + dir);
    json meta = json::parse(in);
    Trajectory traj;
    const std::size_t count = meta["count"];
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.hwf", i);
        Snapshot s = load_snapshot((d / name).string());
        traj.snapshots.emplace_back(s.time, std::move(s.field));
    }
    traj.frame_scales = meta["frame_scales"].get<std::vector<double>>();
    traj.frame_shifts = meta["frame_shifts"].get<std::vector<double>>();
    if (traj.frame_scales.size() != count || traj.frame_shifts.size() != count)
        throw ConfigError("trajectory frame bookkeeping does not match snapshots: " + dir);
    traj.accumulated_scale = meta["accumulated_scale"];
    traj.accumulated_shift = meta["accumulated_shift"];
    traj.halted = meta["halted"];
    for (const auto& e : meta["events"]) {
        EvolutionEvent ev;
        ev.kind = e["kind"] == "regrid" ? EvolutionEvent::Kind::regrid
                                        : EvolutionEvent::Kind::blowup_halt;
        ev.time = e["time"];
        ev.scale = e["scale"];
        ev.detail = e["detail"];
        traj.events.push_back(ev);
    }
    for (const auto& c : meta["conserved"])
        traj.conserved_series.emplace_back(
            c[0], ConservedTriple{c[1], c[2], c[3]});
    return traj;
}

void emit_track_csv(const ModulationSeries& series, const std::string& path) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < series.valid_count; ++i) {
        const ModulationState& st = series.states[i];
        const double l2 = norm_l2(st.eps);
        const double hom = homogeneous_sobolev_norm(st.eps, 0.5);
        double err = 0.0;
        for (const double e : series.mod_error[i]) err = std::max(err, e);
        rows.push_back({series.t[i], series.s[i], st.lambda, st.alpha, st.gamma, st.b,
                        st.v, l2, std::sqrt(l2 * l2 + hom * hom), series.mod[i][0],
                        series.mod[i][1], series.mod[i][2], series.mod[i][3],
                        series.mod[i][4], err});
    }
    emit_csv(path,
             {"t", "s", "lambda", "alpha", "gamma", "b", "v", "eps_L2", "eps_H12",
              "mod1", "mod2", "mod3", "mod4", "mod5", "mod_error"},
             rows);
}

}  // namespace halfwave
