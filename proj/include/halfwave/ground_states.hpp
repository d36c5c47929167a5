#ifndef HALFWAVE_GROUND_STATES_HPP
#define HALFWAVE_GROUND_STATES_HPP

#include <vector>

#include "halfwave/field.hpp"

namespace halfwave {

struct SolverOpts {
    double tolerance = 1e-10;    // residual and iterate-change threshold
    int max_iterations = 500;
};

// Solitary-wave profile of D Q + Q - Q^3 = 0, Q > 0, even.
struct GroundState {
    ComplexField q;
    double residual_norm = 0.0;
    double mass = 0.0;
    double tail_exponent = 0.0;
    int iterations = 0;
};

// Traveling-wave profile of D Q + Q + i v Q' - |Q|^2 Q = 0.
struct BoostedState {
    ComplexField qv;
    double v = 0.0;
    double mass = 0.0;
    double cv = 0.0;                // optimal interpolation constant, 2/cv = mass
    double pohozaev_defect = 0.0;   // |E_v(qv)|, vanishes for exact profiles
    double residual_norm = 0.0;
    int iterations = 0;
};

GroundState solve_ground_state(const Grid& grid, const SolverOpts& opts = {});

// |v| <= 0.95; solved by continuation from v = 0 when |v| is large.
BoostedState solve_boosted(const Grid& grid, double v, const SolverOpts& opts = {});

struct MassCurveRow {
    double v = 0.0;
    double mass = 0.0;
    double cv = 0.0;
    double residual = 0.0;
    double pohozaev_defect = 0.0;
    int iterations = 0;
    bool ok = false;             // solver converged for this row
    bool monotone_ok = false;    // mass strictly below the previous |v| row
};

// One row per velocity, warm-started along the sweep. Rows whose solve fails
// are flagged rather than aborting the sweep.
std::vector<MassCurveRow> mass_curve(const Grid& grid, const std::vector<double>& velocities,
                                     const SolverOpts& opts = {});

// E_v(u) = 1/2 (u, Du) + 1/2 (u, i v u') - 1/4 \int |u|^4  (drift energy).
double drift_energy(const ComplexField& u, double v);

}  // namespace halfwave

#endif
