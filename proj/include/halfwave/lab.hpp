#ifndef HALFWAVE_LAB_HPP
#define HALFWAVE_LAB_HPP

// Scenario orchestration: flat key = value configs, end-to-end runs that
// persist plot-ready CSV plus a manifest with checksums, and directory
// round-trips for profile sets and trajectories.

#include <cstdint>
#include <string>
#include <vector>

#include "halfwave/evolution.hpp"
#include "halfwave/field.hpp"
#include "halfwave/modulation.hpp"
#include "halfwave/profiles.hpp"

namespace halfwave {

inline constexpr const char* kVersion = "1.0.0";

enum class Scenario {
    ground_state,
    mass_curve,
    spectrum,
    profiles,
    residual_sweep,
    blowup_run,
    soliton_check,
};

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

// One flat config covers every scenario; scenario-specific keys are ignored
// by the others but always validated and round-tripped. Documented ranges are
// enforced by validate().
struct ScenarioConfig {
    Scenario scenario = Scenario::ground_state;
    // working grid (power-of-two n)
    std::size_t n = 4096;
    double box = 256.0;
    // iterative solver budget
    double tolerance = 1e-10;
    int max_iterations = 500;
    // mass_curve: velocities j * vmax / steps, j = 0..steps; vmax <= 0.95
    double vmax = 0.9;
    int steps = 9;
    // spectrum: operator block and eigenpair count
    std::string op = "plus";  // plus | minus
    int k = 8;
    // residual_sweep: geometric parameter ladder on one axis
    std::string axis = "b";  // b | v
    double sweep_min = 0.02;
    double sweep_max = 0.16;
    int sweep_count = 4;
    // corrector-chain grid for profiles / residual_sweep / blowup_run
    std::size_t chain_n = 65536;
    double chain_box = 2048.0;
    // blowup_run construction inputs (E0 > 0, t_n < 0)
    double E0 = 1.0;
    double P0 = 0.0;
    double gamma0 = 0.0;
    double x0 = 0.0;
    double t_n = -0.3;
    // time stepping
    double dt = 1e-4;
    double t_end = -0.075;  // blowup_run integrates t_n -> t_end (toward 0-)
    std::size_t snapshot_stride = 100;
    double rescale_trigger = 4.0;  // regrid when the width falls under this many spacings
    double t1 = 1.0;               // soliton_check horizon
    // artifacts
    std::string out_dir = "out";
    std::uint64_t seed = 0;
};

// Flat text format: one "key = value" per line, '#' comments, blank lines
// allowed. Unknown keys and malformed lines are errors carrying the line
// number. Values are parsed losslessly (doubles serialized at 17 digits).
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);

// Field-level range checks; throws ConfigError naming the offending key.
void validate_config(const ScenarioConfig& cfg);

// Fixed-schema CSV with every float at 17 significant digits.
void emit_csv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& rows);

struct RunResult {
    std::string manifest_path;
    std::vector<std::string> files;  // everything listed in the manifest
    double wall_seconds = 0.0;
};

// Executes the scenario end-to-end into cfg.out_dir and writes manifest.json
// listing every produced file with size and checksum, the resolved config,
// the library version and the wall clock. CSV bytes are deterministic for a
// fixed (config, seed, build).
RunResult run(const ScenarioConfig& cfg);

// Profile-set directory: one snapshot per field plus profiles.json with the
// scalars (e1, p1, identity residuals, ground-state metadata).
void save_profile_set(const ProfileSet& ps, const std::string& dir);
ProfileSet load_profile_set(const std::string& dir);

// Trajectory directory: numbered snapshots plus trajectory.json with the
// frame bookkeeping (scales, shifts, events) and the conserved series.
void save_trajectory(const Trajectory& traj, const std::string& dir);
Trajectory load_trajectory(const std::string& dir);

// Modulation series in the track CSV schema:
// t, s, lambda, alpha, gamma, b, v, eps_L2, eps_H12, mod1..mod5, mod_error.
void emit_track_csv(const ModulationSeries& series, const std::string& path);

}  // namespace halfwave

#endif
