#include "halfwave/profiles.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "halfwave/linearized.hpp"
#include "halfwave/spectral.hpp"

namespace halfwave {

namespace {

enum class Parity { even, odd };

// Parity gate and projection: a solve of a definite-parity right-hand side
// with a definite-parity kernel must return a definite-parity real solution;
// anything beyond roundoff growth signals a broken chain.  The gate is taken
// on the interior |x| <= L/4: the x-weighted operator does not vanish at the
// unpaired node x = -L/2 when acting on odd fields with algebraic tails,
// which sources a genuine edge-localized even response of order ~1/L^3 in
// the exact discrete solution.  After the gate the field is symmetrized
// exactly so errors cannot accumulate down the chain.
void enforce_parity(ComplexField& f, Parity parity, const std::string& name) {
    const std::size_t n = f.grid.n;
    const double sign = (parity == Parity::even) ? 1.0 : -1.0;
    const double peak = norm_inf(f);
    double defect = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        if (std::abs(f.grid.node(j)) <= 0.25 * f.grid.box_length)
            defect = std::max(defect,
                              std::abs(f.values[j] - sign * std::conj(f.values[n - j])));
        defect = std::max(defect, std::abs(f.values[j].imag()));
    }
    if (peak > 0.0 && defect > 1e-8 * peak)
        throw SolverError(name + ": parity defect " + std::to_string(defect / peak) +
                          " relative exceeds 1e-8");
    f.values[0] = (parity == Parity::even) ? cplx{f.values[0].real(), 0.0} : cplx{0.0, 0.0};
    for (std::size_t j = 1; 2 * j <= n; ++j) {
        const double a = 0.5 * (f.values[j].real() + sign * f.values[n - j].real());
        f.values[j] = cplx{a, 0.0};
        f.values[n - j] = cplx{sign * a, 0.0};
    }
}

struct Chain {
    const GroundState& q;
    LinearizedOperator lplus;
    LinearizedOperator lminus;
    ComplexField dq;   // grad Q, kernel of L+
    ProfileSet* out;

    explicit Chain(const GroundState& gs, ProfileSet* set)
        : q(gs),
          lplus{OperatorKind::plus, gs.q},
          lminus{OperatorKind::minus, gs.q},
          dq(derivative(gs.q)),
          out(set) {}

    // One step of the hierarchy: record the named solvability pairing, abort
    // if it exceeds the 1e-5 gate, solve, and enforce the expected parity.
    ComplexField solve(OperatorKind kind, const ComplexField& rhs, Parity parity,
                       const std::string& name) {
        const ComplexField& kernel = (kind == OperatorKind::plus) ? dq : q.q;
        const double rel =
            std::abs(inner(rhs, kernel)) / (norm_l2(rhs) * norm_l2(kernel));
        out->identity_residuals.push_back({name, rel});
        if (rel > 1e-5)
            throw SolverError("profile chain: solvability identity '" + name +
                              "' violated at " + std::to_string(rel) + " relative");
        const LinearizedOperator& op = (kind == OperatorKind::plus) ? lplus : lminus;
        ComplexField x = solve_constrained(op, rhs, {kernel}, 1e-5);
        enforce_parity(x, parity, name);
        return x;
    }
};

ComplexField lincomb(std::initializer_list<std::pair<double, const ComplexField*>> terms) {
    const ComplexField* first = terms.begin()->second;
    ComplexField acc{first->grid};
    for (const auto& [c, f] : terms)
        for (std::size_t j = 0; j < acc.grid.n; ++j) acc.values[j] += c * f->values[j];
    return acc;
}

double fitted_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ProfileSet build_profiles(const GroundState& q) {
    if (!(q.residual_norm <= 1e-8))
        throw ConfigError("profile build requires a ground state with residual <= 1e-8");
    ProfileSet ps{q};
    Chain chain(q, &ps);
    const ComplexField& Q = q.q;

    // O(b): scaling source.  The pairing (Lambda Q, Q) is the first and
    // largest finite-box defect of the chain (~15/L^3).
    ComplexField lamq = scaling_generator(Q);
    ps.s1 = chain.solve(OperatorKind::minus, lamq, Parity::even,
                        "scaling source orthogonal to Q");
    ps.e1 = 0.5 * std::real(inner(lamq, ps.s1));

    // O(v): translation source; orthogonality to Q is exact by parity.
    ComplexField ndq = lincomb({{-1.0, &chain.dq}});
    ps.g1 = chain.solve(OperatorKind::minus, ndq, Parity::odd,
                        "translation source orthogonal to Q");
    ps.p1 = 2.0 * std::real(inner(ndq, ps.g1));

    // O(b^2): 1/2 S1 - Lambda S1 + S1^2 Q
    {
        ComplexField lam_s1 = scaling_generator(ps.s1);
        ComplexField s1s1q = dealiased_triple_product(ps.s1, ps.s1, Q);
        ComplexField rhs = lincomb({{0.5, &ps.s1}, {-1.0, &lam_s1}, {1.0, &s1s1q}});
        ps.t2 = chain.solve(OperatorKind::plus, rhs, Parity::even,
                            "second-order scaling corrector");
    }

    // O(v^2): grad G1 + G1^2 Q
    {
        ComplexField dg1 = derivative(ps.g1);
        ComplexField g1g1q = dealiased_triple_product(ps.g1, ps.g1, Q);
        ComplexField rhs = lincomb({{1.0, &dg1}, {1.0, &g1g1q}});
        ps.h2 = chain.solve(OperatorKind::plus, rhs, Parity::even,
                            "second-order boost corrector");
    }

    // O(bv): G1 - Lambda G1 + grad S1 + 2 S1 G1 Q.  The vanishing of the
    // pairing with grad Q is the nontrivial mixed solvability identity.
    {
        ComplexField lam_g1 = scaling_generator(ps.g1);
        ComplexField ds1 = derivative(ps.s1);
        ComplexField s1g1q = dealiased_triple_product(ps.s1, ps.g1, Q);
        ComplexField rhs = lincomb(
            {{1.0, &ps.g1}, {-1.0, &lam_g1}, {1.0, &ds1}, {2.0, &s1g1q}});
        ps.f2 = chain.solve(OperatorKind::plus, rhs, Parity::odd,
                            "mixed corrector orthogonal to grad Q");
    }

    // O(b^3): -T2 + Lambda T2 + 2 Q T2 S1 + S1^3.  Orthogonality to Q is the
    // identity -(Q, T2) = (1/2)(S1, S1).
    {
        ComplexField lam_t2 = scaling_generator(ps.t2);
        ComplexField qt2s1 = dealiased_triple_product(Q, ps.t2, ps.s1);
        ComplexField s13 = dealiased_triple_product(ps.s1, ps.s1, ps.s1);
        ComplexField rhs = lincomb(
            {{-1.0, &ps.t2}, {1.0, &lam_t2}, {2.0, &qt2s1}, {1.0, &s13}});
        ps.r30 = chain.solve(OperatorKind::minus, rhs, Parity::even,
                             "third-order corrector: -(Q,T2) = (1/2)(S1,S1)");
    }

    // O(b^4): (3/2) r30 - Lambda r30 + 2 Q S1 r30 + 3 Q T2^2
    {
        ComplexField lam_r30 = scaling_generator(ps.r30);
        ComplexField qs1r30 = dealiased_triple_product(Q, ps.s1, ps.r30);
        ComplexField qt2t2 = dealiased_triple_product(Q, ps.t2, ps.t2);
        ComplexField rhs = lincomb(
            {{1.5, &ps.r30}, {-1.0, &lam_r30}, {2.0, &qs1r30}, {3.0, &qt2t2}});
        ps.r40 = chain.solve(OperatorKind::plus, rhs, Parity::even,
                             "fourth-order corrector");
    }

    // O(b^2 v): -(3/2) F2 + Lambda F2 - grad T2 + 2 Q F2 S1 + 3 S1^2 G1
    {
        ComplexField lam_f2 = scaling_generator(ps.f2);
        ComplexField dt2 = derivative(ps.t2);
        ComplexField qf2s1 = dealiased_triple_product(Q, ps.f2, ps.s1);
        ComplexField s1s1g1 = dealiased_triple_product(ps.s1, ps.s1, ps.g1);
        ComplexField rhs = lincomb({{-1.5, &ps.f2},
                                    {1.0, &lam_f2},
                                    {-1.0, &dt2},
                                    {2.0, &qf2s1},
                                    {3.0, &s1s1g1}});
        ps.r21 = chain.solve(OperatorKind::minus, rhs, Parity::odd,
                             "mixed third-order corrector");
    }

    // adjoint root mode: L+ rho1 = S1, then the two generators of rho2
    ps.rho1 = chain.solve(OperatorKind::plus, ps.s1, Parity::even,
                          "adjoint mode source");
    {
        ComplexField qs1rho1 = dealiased_triple_product(Q, ps.s1, ps.rho1);
        ComplexField lam_rho1 = scaling_generator(ps.rho1);
        ComplexField rhs = lincomb(
            {{2.0, &qs1rho1}, {1.0, &lam_rho1}, {-2.0, &ps.t2}});
        ps.rho2_b = chain.solve(OperatorKind::minus, rhs, Parity::even,
                                "adjoint b-generator orthogonal to Q");
    }
    {
        // The sign of the gradient and F2 terms is fixed by the role of the
        // adjoint mode: only 2 Q G1 rho1 - grad rho1 - F2 makes the
        // first-order cross terms cancel in the projected modulation
        // equations (the pairing with the adjoint mode then deviates from
        // its leading term at second order in the parameters).
        ComplexField qg1rho1 = dealiased_triple_product(Q, ps.g1, ps.rho1);
        ComplexField drho1 = derivative(ps.rho1);
        ComplexField rhs = lincomb(
            {{2.0, &qg1rho1}, {-1.0, &drho1}, {-1.0, &ps.f2}});
        ps.rho2_v = chain.solve(OperatorKind::minus, rhs, Parity::odd,
                                "adjoint v-generator orthogonal to Q");
    }

    if (!(ps.e1 > 0.0) || !(ps.p1 > 0.0))
        throw SolverError("profile chain: invariant coefficients must be positive");
    return ps;
}

ComplexField assemble_qp(const ProfileSet& ps, const ProfileParams& params) {
    const double b = params.b, v = params.v;
    // The expansion is asymptotic in small (b, v) but the assembly is a plain
    // polynomial, and the self-similar initial data of interest starts at
    // b of order one; gate only against clearly meaningless parameters.
    if (!(std::abs(b) <= 2.0) || !(std::abs(v) <= 0.95))
        throw ConfigError("profile parameters must satisfy |b| <= 2, |v| <= 0.95");
    const Grid& g = ps.q.q.grid;
    ComplexField u{g};
    for (std::size_t j = 0; j < g.n; ++j) {
        const double re = ps.q.q.values[j].real() + b * v * ps.f2.values[j].real() +
                          b * b * ps.t2.values[j].real() +
                          v * v * ps.h2.values[j].real() +
                          b * b * b * b * ps.r40.values[j].real();
        const double im = b * ps.s1.values[j].real() + v * ps.g1.values[j].real() +
                          b * b * b * ps.r30.values[j].real() +
                          b * b * v * ps.r21.values[j].real();
        u.values[j] = cplx{re, im};
    }
    return u;
}

ProfileResidual profile_residual(const ProfileSet& ps, const ProfileParams& params) {
    const double b = params.b, v = params.v;
    ComplexField u = assemble_qp(ps, params);
    const Grid& g = u.grid;

    // exact polynomial parameter derivatives of the ansatz
    ComplexField du_db{g}, du_dv{g};
    for (std::size_t j = 0; j < g.n; ++j) {
        du_db.values[j] =
            cplx{v * ps.f2.values[j].real() + 2.0 * b * ps.t2.values[j].real() +
                     4.0 * b * b * b * ps.r40.values[j].real(),
                 ps.s1.values[j].real() + 3.0 * b * b * ps.r30.values[j].real() +
                     2.0 * b * v * ps.r21.values[j].real()};
        du_dv.values[j] = cplx{b * ps.f2.values[j].real() + 2.0 * v * ps.h2.values[j].real(),
                               ps.g1.values[j].real() + b * b * ps.r21.values[j].real()};
    }

    ComplexField du = fractional_derivative(u, 1.0);
    ComplexField lam_u = scaling_generator(u);
    ComplexField grad_u = derivative(u);
    ComplexField uc{g};
    for (std::size_t j = 0; j < g.n; ++j) uc.values[j] = std::conj(u.values[j]);
    ComplexField cubic = dealiased_triple_product(u, uc, u);

    const cplx i{0.0, 1.0};
    ProfileResidual out{ComplexField{g}, 0.0};
    for (std::size_t j = 0; j < g.n; ++j) {
        out.psi.values[j] = i * (0.5 * b * b) * du_db.values[j] +
                            i * (b * v) * du_dv.values[j] + du.values[j] + u.values[j] -
                            i * b * lam_u.values[j] + i * v * grad_u.values[j] -
                            cubic.values[j];
    }
    out.h1_norm = sobolev_norm(out.psi, 1.0);
    return out;
}

InvariantExpansionReport invariant_expansion_report(const ProfileSet& ps) {
    InvariantExpansionReport rep;
    const ConservedTriple base = conserved(ps.q.q);

    rep.b_values = {0.02, 0.04, 0.08, 0.16};
    for (const double b : rep.b_values) {
        const ConservedTriple c = conserved(assemble_qp(ps, {b, 0.0}));
        // measured against the discrete ground-state energy so the finite-box
        // energy offset does not mask the b^4 term
        rep.energy_defect.push_back(c.energy - base.energy - ps.e1 * b * b);
    }
    rep.energy_order = fitted_loglog_slope(rep.b_values, rep.energy_defect);
    rep.energy_order_ok = rep.energy_order >= 4.0 - 0.5;

    rep.v_values = {0.02, 0.04, 0.05, 0.08, 0.10, 0.16};
    for (const double v : rep.v_values) {
        const ConservedTriple c = conserved(assemble_qp(ps, {0.0, v}));
        rep.momentum_defect.push_back(c.momentum - base.momentum - ps.p1 * v);
        rep.mass_defect_v.push_back(c.mass - base.mass);
    }
    rep.momentum_order = fitted_loglog_slope(rep.v_values, rep.momentum_defect);
    rep.momentum_order_ok = rep.momentum_order >= 2.0 - 0.25;
    rep.mass_defect_negative = true;
    for (const double d : rep.mass_defect_v)
        if (!(d < 0.0)) rep.mass_defect_negative = false;
    return rep;
}

ProfileSet restrict_profiles(const ProfileSet& ps, const Grid& target) {
    const Grid& src = ps.q.q.grid;
    const double ratio = target.spacing() / src.spacing();
    const auto stride = static_cast<std::size_t>(std::lround(ratio));
    if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-12 * ratio)
        throw ConfigError("profile restriction: target spacing must be an integer "
                          "multiple of the source spacing");
    if (target.box_length > src.box_length + 1e-12)
        throw ConfigError("profile restriction: target box exceeds the source box");
    const double offset = 0.5 * (src.box_length - target.box_length) / src.spacing();
    const auto base = static_cast<std::size_t>(std::lround(offset));
    if (std::abs(offset - static_cast<double>(base)) > 1e-9)
        throw ConfigError("profile restriction: grids are not node-aligned");

    auto cut = [&](const ComplexField& f) {
        ComplexField out{target};
        for (std::size_t j = 0; j < target.n; ++j)
            out.values[j] = f.values[base + j * stride];
        return out;
    };

    ProfileSet out;
    out.q.q = cut(ps.q.q);
    out.q.mass = conserved(out.q.q).mass;
    out.q.iterations = ps.q.iterations;
    const double hi = std::min(80.0, 0.4 * target.box_length);
    out.q.tail_exponent = tail_exponent(out.q.q, 20.0, hi);
    {
        // equation residual of the restricted samples on the target grid
        ComplexField r = fractional_derivative(out.q.q, 1.0);
        const ComplexField cubic =
            dealiased_triple_product(out.q.q, out.q.q, out.q.q);
        for (std::size_t j = 0; j < target.n; ++j)
            r.values[j] += out.q.q.values[j] - cubic.values[j];
        out.q.residual_norm = norm_l2(r) / norm_l2(out.q.q);
    }
    out.s1 = cut(ps.s1);
    out.g1 = cut(ps.g1);
    out.t2 = cut(ps.t2);
    out.h2 = cut(ps.h2);
    out.f2 = cut(ps.f2);
    out.r30 = cut(ps.r30);
    out.r21 = cut(ps.r21);
    out.r40 = cut(ps.r40);
    out.rho1 = cut(ps.rho1);
    out.rho2_b = cut(ps.rho2_b);
    out.rho2_v = cut(ps.rho2_v);
    out.e1 = ps.e1;
    out.p1 = ps.p1;
    out.identity_residuals = ps.identity_residuals;
    return out;
}

}  // namespace halfwave
