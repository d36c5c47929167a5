#ifndef HALFWAVE_PROFILES_HPP
#define HALFWAVE_PROFILES_HPP

#include <string>
#include <vector>

#include "halfwave/field.hpp"
#include "halfwave/ground_states.hpp"

namespace halfwave {

// The corrector hierarchy of the approximate blowup profile.  Every member
// is a real field with a definite parity; the complex assembly happens only
// in assemble_qp.  s1, g1, r30, r21 enter the imaginary part, the rest the
// real part; rho2_b and rho2_v are the two generator fields whose b- and
// v-weighted sum forms the second component of the adjoint root mode.
struct ProfileSet {
    GroundState q;
    ComplexField s1;      // even, O(b) imaginary part
    ComplexField g1;      // odd, O(v) imaginary part
    ComplexField t2;      // even, O(b^2) real part
    ComplexField h2;      // even, O(v^2) real part
    ComplexField f2;      // odd, O(bv) real part
    ComplexField r30;     // even, O(b^3) imaginary part
    ComplexField r21;     // odd, O(b^2 v) imaginary part
    ComplexField r40;     // even, O(b^4) real part
    ComplexField rho1;    // even, first component of the adjoint root mode
    ComplexField rho2_b;  // b-generator of the second component
    ComplexField rho2_v;  // v-generator of the second component
    double e1 = 0.0;      // = (1/2)(L- S1, S1) > 0, energy coefficient
    double p1 = 0.0;      // = 2(L- G1, G1) > 0, momentum coefficient

    // named solvability pairings measured during the build, for reporting
    struct IdentityResidual {
        std::string name;
        double value;  // |(rhs, kernel)| relative to scale
    };
    std::vector<IdentityResidual> identity_residuals;
};

struct ProfileParams {
    double b = 0.0;
    double v = 0.0;
};

// Solves the corrector chain in dependency order, verifying each equation's
// solvability identity (named abort above 1e-5 scale) and the parity of each
// solution.  The grid of q must be large enough that the finite-box pairing
// defects stay under the gates: the third-order pairing decays like 1/L^2
// and crosses 1e-5 only around L = 2048, so (n, L) = (65536, 2048) is the
// working default.
ProfileSet build_profiles(const GroundState& q);

// Q + b v F2 + b^2 T2 + v^2 H2 + b^4 r40 + i(b S1 + v G1 + b^3 r30 + b^2 v r21)
ComplexField assemble_qp(const ProfileSet& ps, const ProfileParams& params);

// Samples every profile field onto a coarser/smaller node-aligned grid (the
// target spacing must be an integer multiple of the source spacing and the
// target box must fit inside the source box with aligned nodes). The chain
// itself only converges on a large box; modulation work on evolution-sized
// grids uses this restriction.
ProfileSet restrict_profiles(const ProfileSet& ps, const Grid& target);

struct ProfileResidual {
    ComplexField psi;
    double h1_norm = 0.0;
};

// Defect of the self-similar profile equation at (b, v), with the parameter
// derivatives taken analytically from the polynomial ansatz.
ProfileResidual profile_residual(const ProfileSet& ps, const ProfileParams& params);

struct InvariantExpansionReport {
    // dyadic sweep data: parameter values and invariant defects
    std::vector<double> b_values;
    std::vector<double> energy_defect;  // E(Q_P) - e1 b^2 at v = 0
    std::vector<double> v_values;
    std::vector<double> momentum_defect;  // P(Q_P) - p1 v at b = 0
    std::vector<double> mass_defect_v;    // M(Q_P) - M(Q) at b = 0

    double energy_order = 0.0;    // fitted log-log slope of the energy defect
    double momentum_order = 0.0;  // fitted slope of the momentum defect
    bool energy_order_ok = false;      // >= 4
    bool momentum_order_ok = false;    // >= 2
    bool mass_defect_negative = false;  // subcritical mass for small v != 0
};

InvariantExpansionReport invariant_expansion_report(const ProfileSet& ps);

}  // namespace halfwave

#endif
