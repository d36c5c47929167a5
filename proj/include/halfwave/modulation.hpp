#ifndef HALFWAVE_MODULATION_HPP
#define HALFWAVE_MODULATION_HPP

// Geometrical decomposition u = lambda^(-1/2) (Q_P + eps)((x - alpha)/lambda)
// e^(i gamma) with five orthogonality conditions, modulation-parameter time
// series, minimal-mass initial data, and the localized virial machinery.

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "halfwave/evolution.hpp"
#include "halfwave/field.hpp"
#include "halfwave/linearized.hpp"
#include "halfwave/profiles.hpp"
#include "halfwave/quadrature.hpp"

namespace halfwave {

struct ModulationState {
    double lambda = 1.0;
    double alpha = 0.0;
    double gamma = 0.0;
    double b = 0.0;
    double v = 0.0;
    ComplexField eps;  // residual in the rescaled variable, on the profile grid
    std::array<double, 5> ortho_residuals{};  // the five pairings at the solution
};

// Newton solve of the five orthogonality pairings sigma(lambda, alpha, gamma,
// b, v) = 0 with a numerically differenced Jacobian. u must live on the grid
// of ps (restrict the profile set to the evolution grid first if needed).
// Converged when max |sigma| <= newton_tol * ||Q||^2.
ModulationState decompose(const ComplexField& u, const ProfileSet& ps,
                          const ModulationState& guess, double newton_tol = 1e-10,
                          int max_iterations = 60);

// The five pairings at a given parameter point, exposed so property tests can
// difference them directly (Jacobian structure checks).
std::array<double, 5> orthogonality_pairings(const ComplexField& u, const ProfileSet& ps,
                                             const ModulationState& params);

struct ModulationSeries {
    std::vector<double> t;  // physical time per tracked snapshot
    std::vector<double> s;  // rescaled time, ds/dt = 1/lambda
    std::vector<ModulationState> states;  // physical-frame lambda and alpha
    // centered-difference estimates in s of the five parameter laws
    // (b_s + b^2/2, gamma_s - 1, lambda_s/lambda + b, alpha_s/lambda - v,
    //  v_s + b v), with |3-point - 5-point| error bars
    std::vector<std::array<double, 5>> mod;
    std::vector<std::array<double, 5>> mod_error;
    std::vector<double> mod_scale;  // lambda^2 + b^4 + v^2 + ||eps||^2 per row
    std::size_t valid_count = 0;    // series truncated at the first failure
};

ModulationSeries track(const Trajectory& traj, const ProfileSet& ps,
                       const ModulationState& initial_guess = {});

// Initial data of the minimal-mass blowup solution at time t_n < 0:
// lambda^(-1/2) Q_P((x - x0)/lambda) e^(i gamma) with
// C0 = sqrt(e1/E0), D0 = P0/p1, b = -t_n/(2 C0^2), lambda = t_n^2/(4 C0^2),
// gamma = gamma0 - 4 C0^2/t_n, v = D0 t_n^2/(2 C0). Returned on the ps grid.
ComplexField minimal_mass_initial_data(const ProfileSet& ps, double t_n, double E0,
                                       double P0, double gamma0, double x0);

// Localization weight: even convex phi with phi'(x) = x on [0,1] and
// phi'(x) = 3 - e^(-|x|) for x >= 2, blended by a quintic Hermite on (1,2).
double phi_prime(double x);
double phi_second(double x);

struct VirialConfig {
    double A = 100.0;       // localization radius
    SQuadrature squad{};    // s-quadrature for the smoothing integrals
};

// J_A = 1/2 int |D^(1/2) ut|^2 + 1/2 int |ut|^2/lambda
//       - int [F(w+ut) - F(w) - F'(w).ut]
//       + (b/2) Im int A phi'((x-alpha)/(A lambda)) (grad ut) conj(ut),
// with F(u) = |u|^4/4.
double virial_value(const ComplexField& ut, const ComplexField& w,
                    const ModulationState& state, const VirialConfig& cfg);

// The localized quadratic forms
//   plus  = int_s sqrt(s) int phi''(x/A) |grad eps1_s|^2 + int eps1^2 - 3 int Q^2 eps1^2
//   minus = same smoothing term for eps2 + int eps2^2 - int Q^2 eps2^2,
// where eps1/eps2 are the real/imaginary parts and f_s = sqrt(2/pi)
// (-Laplacian + s)^(-1) f. Only the ground state enters the potentials.
std::pair<double, double> localized_forms(const ComplexField& eps, const GroundState& q,
                                          double A, const VirialConfig& cfg);

// Minimum of the localized form (normalized by the L^2 norm) over the
// orthogonal complement of the given constraint fields, via a dense
// frequency-space eigensolve (the s-integral of the smoothing kernel has the
// closed form 2 xi eta / (|xi| + |eta|)). Requires n <= 4096.
double localized_form_minimum(const GroundState& q, OperatorKind kind, double A,
                              const std::vector<ComplexField>& ortho);

}  // namespace halfwave

#endif
