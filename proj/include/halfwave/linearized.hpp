#ifndef HALFWAVE_LINEARIZED_HPP
#define HALFWAVE_LINEARIZED_HPP

#include <vector>

#include "halfwave/field.hpp"

namespace halfwave {

enum class OperatorKind { plus, minus };

// Self-adjoint linearization block D + 1 - c Q^2 about the solitary wave,
// with c = 3 (real part, "plus") or c = 1 (imaginary part, "minus").
struct LinearizedOperator {
    OperatorKind kind;
    ComplexField q;
    double coefficient() const { return kind == OperatorKind::plus ? 3.0 : 1.0; }
};

ComplexField apply(const LinearizedOperator& op, const ComplexField& f);

// Unique solution of L x = rhs orthogonal to the given kernel vectors,
// by projected preconditioned MINRES.  Requires rhs to be orthogonal to the
// kernel within solvability_tol relative (solvability of the constrained
// problem).  The default 1e-6 assumes a box large enough that the algebraic
// tails of the coefficient field do not pollute the pairing; small boxes can
// pass an explicitly larger tolerance.
ComplexField solve_constrained(const LinearizedOperator& op, const ComplexField& rhs,
                               const std::vector<ComplexField>& kernel,
                               double solvability_tol = 1e-6);

struct EigenPair {
    double value;
    ComplexField field;
};

struct SpectrumReport {
    std::vector<EigenPair> lowest;               // k lowest eigenpairs, ascending
    std::vector<std::size_t> kernel_candidates;  // indices into lowest with |value| < kernel_tol
    int negative_count = 0;                      // eigenvalues below -kernel_tol
    double drift = 0.0;                          // max relative eigenvalue drift vs the n/2 grid
    double kernel_tol = 0.0;                     // 50x drift: zero modes are classified
                                                 // relative to measured discretization error
};

// Dense symmetric eigensolve of the discretized operator (n <= 4096), with a
// coarse-grid consistency estimate.
SpectrumReport spectrum_report(const LinearizedOperator& op, int k);

// Smallest Rayleigh quotient of (L+ e1, e1) + (L- e2, e2) over the
// H^{1/2}-normalized space with e1 orthogonal to ortho_plus and e2 orthogonal
// to ortho_minus.  The two blocks decouple, so this is the minimum of two
// projected dense generalized eigenproblems.
double coercivity_constant(const LinearizedOperator& lplus, const LinearizedOperator& lminus,
                           const std::vector<ComplexField>& ortho_plus,
                           const std::vector<ComplexField>& ortho_minus);

}  // namespace halfwave

#endif
