#ifndef HALFWAVE_EVOLUTION_HPP
#define HALFWAVE_EVOLUTION_HPP

// Time integration of i u_t = D u - |u|^2 u by Strang splitting between the
// two exactly solvable sub-flows, with conserved-quantity tracking, blowup
// detection and adaptive rescaling that follows concentration.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "halfwave/field.hpp"
#include "halfwave/spectral.hpp"

namespace halfwave {

struct EvolutionConfig {
    double dt = 1e-3;           // base step (frame time, always positive)
    double t_begin = 0.0;
    double t_end = 1.0;         // may be < t_begin: the scheme is reversible
    double rescale_trigger = 0.0;  // concentration threshold in grid spacings;
                                   // <= 0 disables regridding
    double cfl_safety = 0.1;    // bound on dt * ||u||_inf^2
    std::size_t snapshot_stride = 100;
    double halt_ceiling = 1e3;  // blowup halt at ceiling * initial H^(1/2)
    double dt_min = 1e-9;       // halt when the admissible step collapses
    bool linear_only = false;   // test hook: disable the cubic term
};

// Step rejection when the requested dt cannot resolve the nonlinear phase
// rotation; carries the largest admissible step.
struct CflError : NumericsError {
    double admissible_dt;
    CflError(const std::string& msg, double adm) : NumericsError(msg), admissible_dt(adm) {}
};

// Non-finite state detected mid-run; carries the last valid snapshot.
struct CorruptStateError : NumericsError {
    double time;
    ComplexField last_valid;
    CorruptStateError(const std::string& msg, double t, ComplexField f)
        : NumericsError(msg), time(t), last_valid(std::move(f)) {}
};

struct EvolutionEvent {
    enum class Kind { regrid, blowup_halt };
    Kind kind;
    double time;    // physical time of the event
    double scale;   // zoom factor applied (regrid) / accumulated scale (halt)
    std::string detail;
};

// Snapshots are stored in the current zoom frame; accumulated_scale is the
// product of all regrid factors, so one frame time unit equals that many
// physical time units and the physical homogeneous H^(1/2) norm is the frame
// value divided by sqrt(accumulated_scale). A physical position x relates to
// the frame coordinate y by x = scale * y + shift.
struct Trajectory {
    std::vector<std::pair<double, ComplexField>> snapshots;  // (physical time, frame field)
    std::vector<std::pair<double, ConservedTriple>> conserved_series;
    std::vector<double> frame_scales;   // accumulated scale per snapshot
    std::vector<double> frame_shifts;   // accumulated shift per snapshot
    std::vector<EvolutionEvent> events;
    double accumulated_scale = 1.0;
    double accumulated_shift = 0.0;
    bool halted = false;
};

using Observer = std::function<void(double t, const ComplexField& u)>;

// One Strang step: half nonlinear phase rotation (exact, |u| pointwise
// conserved), full linear group e^{-i dt |xi|} (exact in Fourier), half
// nonlinear rotation. dt may be negative.
ComplexField step(const ComplexField& u, double dt, double cfl_safety = 0.1,
                  bool linear_only = false);

// Concentration-length proxy ||u||^2 / ||D^(1/2) u||^2 (scales like the
// soliton width for u near a rescaled Q).
double concentration_scale(const ComplexField& u);

Trajectory evolve(const ComplexField& u0, const EvolutionConfig& cfg,
                  const Observer& observer = {});

}  // namespace halfwave

#endif
