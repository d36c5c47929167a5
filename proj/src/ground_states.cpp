#include "halfwave/ground_states.hpp"

#include <cmath>
#include <string>

#include "halfwave/spectral.hpp"

namespace halfwave {

namespace {

// Symbol of the linear part D + 1 + i v d/dx acting on mode k.  The drift
// contribution -v*xi has odd symbol and is dropped on the unpaired Nyquist
// mode, mirroring the derivative operator.
double linear_symbol(const Grid& g, std::size_t k, double v) {
    const double xi = g.wavenumber(k);
    double s = std::abs(xi) + 1.0;
    if (k != g.n / 2) s -= v * xi;
    return s;
}

ComplexField cubic_term(const ComplexField& u) {
    ComplexField uc{u.grid};
    for (std::size_t j = 0; j < u.grid.n; ++j) uc.values[j] = std::conj(u.values[j]);
    return dealiased_triple_product(u, uc, u);
}

// Quadratic form sum_k s_v(xi_k) |c_k|^2 * (L/n^2).
double drift_quadratic_form(const ComplexField& u, double v) {
    const std::vector<cplx> c = fft(u.values);
    const Grid& g = u.grid;
    const double w = g.box_length / (static_cast<double>(g.n) * static_cast<double>(g.n));
    double acc = 0.0;
    for (std::size_t k = 0; k < g.n; ++k)
        acc += (linear_symbol(g, k, v) - 1.0) * std::norm(c[k]) * w;
    return acc;
}

// Remove the translation and phase drift: shift the |u|^2 barycenter to the
// origin (exact Fourier shift) and rotate the spatial mean onto the positive
// real axis.  Without this the three-parameter symmetry group lets the
// iteration wander and stall.
void pin_symmetries(ComplexField& u) {
    const Grid& g = u.grid;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double p = std::norm(u.values[j]);
        num += g.node(j) * p;
        den += p;
    }
    if (den <= 0.0) return;
    const double xbar = num / den;
    std::vector<cplx> c = fft(u.values);
    for (std::size_t k = 0; k < g.n; ++k)
        c[k] *= std::polar(1.0, g.wavenumber(k) * xbar);
    u.values = ifft(c);
    cplx mean{0.0, 0.0};
    for (std::size_t j = 0; j < g.n; ++j) mean += u.values[j];
    const double m = std::abs(mean);
    if (m > 0.0) {
        const cplx rot = std::conj(mean) / m;
        for (auto& z : u.values) z *= rot;
    }
    // Recentre to even symmetry: the solitary-wave family satisfies
    // q(-x) = conj(q(x)), which in this transform convention is a real
    // spectrum.  Without the projection the translation mode, neutral for
    // the iteration, equilibrates at a small residual asymmetry instead of
    // converging out.
    c = fft(u.values);
    for (auto& z : c) z = cplx{z.real(), 0.0};
    u.values = ifft(c);
}

double equation_residual(const ComplexField& u, const ComplexField& cubic, double v) {
    std::vector<cplx> c = fft(u.values);
    const Grid& g = u.grid;
    for (std::size_t k = 0; k < g.n; ++k) c[k] *= linear_symbol(g, k, v);
    ComplexField r{g, ifft(c)};
    for (std::size_t j = 0; j < g.n; ++j) r.values[j] -= cubic.values[j];
    return norm_l2(r) / norm_l2(u);
}

struct IterationResult {
    ComplexField u;
    double residual;
    int iterations;
    bool converged;
};

// Petviashvili iteration u <- M^{3/2} (D + 1 + i v d/dx)^{-1} |u|^2 u with the
// standard stabilizer exponent 3/2 for a cubic nonlinearity.
IterationResult petviashvili(const Grid& g, double v, ComplexField u, const SolverOpts& opts) {
    const double initial_norm = norm_l2(u);
    double residual = 1.0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const ComplexField cubic = cubic_term(u);
        residual = equation_residual(u, cubic, v);

        const double numerator = drift_quadratic_form(u, v) + norm_l2(u) * norm_l2(u);
        const double denominator = std::real(inner(cubic, u));
        if (!(denominator > 0.0) || !std::isfinite(numerator / denominator))
            throw SolverError("Petviashvili stabilizer degenerated (collapse toward zero)");
        const double stab = numerator / denominator;

        std::vector<cplx> c = fft(cubic.values);
        for (std::size_t k = 0; k < g.n; ++k) c[k] /= linear_symbol(g, k, v);
        ComplexField next{g, ifft(c)};
        const double amp = std::pow(stab, 1.5);
        for (auto& z : next.values) z *= amp;
        pin_symmetries(next);

        double change = 0.0;
        for (std::size_t j = 0; j < g.n; ++j)
            change += std::norm(next.values[j] - u.values[j]) * g.spacing();
        change = std::sqrt(change) / norm_l2(u);

        u = std::move(next);
        if (norm_l2(u) < 1e-12 * initial_norm)
            throw SolverError("Petviashvili iterate collapsed to zero");
        if (residual <= opts.tolerance && change <= opts.tolerance) {
            ++it;
            return {std::move(u), residual, it, true};
        }
    }
    return {std::move(u), residual, it, false};
}

ComplexField sech_seed(const Grid& g) {
    ComplexField u{g};
    for (std::size_t j = 0; j < g.n; ++j) {
        const double x = g.node(j);
        u.values[j] = 1.5 / std::cosh(0.8 * x);
    }
    return u;
}

BoostedState package_boosted(IterationResult r, double v) {
    BoostedState out;
    out.v = v;
    out.mass = conserved(r.u).mass;
    out.cv = 2.0 / out.mass;
    out.pohozaev_defect = std::abs(drift_energy(r.u, v));
    out.residual_norm = r.residual;
    out.iterations = r.iterations;
    out.qv = std::move(r.u);
    return out;
}

// Continuation schedule toward a target velocity: coarse steps up to 0.7,
// then 0.05 as the multiplier (|xi| - v xi + 1)^{-1} loses ellipticity.
std::vector<double> continuation_chain(double v) {
    std::vector<double> chain;
    const double s = (v < 0.0) ? -1.0 : 1.0;
    const double a = std::abs(v);
    for (double w = 0.1; w < std::min(a, 0.7) - 1e-12; w += 0.1) chain.push_back(s * w);
    if (a > 0.7) for (double w = 0.7; w < a - 1e-12; w += 0.05) chain.push_back(s * w);
    chain.push_back(v);
    return chain;
}

}  // namespace

double drift_energy(const ComplexField& u, double v) {
    const double kinetic = drift_quadratic_form(u, v);
    const std::vector<double> density = dealiased_abs2(u);
    double quartic = 0.0;
    for (const double d : density) quartic += d * d;
    quartic *= u.grid.spacing();
    return 0.5 * kinetic - 0.25 * quartic;
}

GroundState solve_ground_state(const Grid& grid, const SolverOpts& opts) {
    if (!(opts.tolerance >= 1e-12 && opts.tolerance <= 1e-4))
        throw ConfigError("ground-state tolerance must lie in [1e-12, 1e-4]");
    IterationResult r = petviashvili(grid, 0.0, sech_seed(grid), opts);
    if (!r.converged)
        throw SolverError("ground-state iteration did not converge in " +
                          std::to_string(opts.max_iterations) + " iterations");
    GroundState out;
    out.residual_norm = r.residual;
    out.iterations = r.iterations;
    out.mass = conserved(r.u).mass;
    out.q = std::move(r.u);
    const double hi = std::min(80.0, 0.4 * grid.box_length);
    out.tail_exponent = tail_exponent(out.q, 20.0, hi);
    return out;
}

BoostedState solve_boosted(const Grid& grid, double v, const SolverOpts& opts) {
    if (!(std::abs(v) <= 0.95))
        throw ConfigError("boosted solver requires |v| <= 0.95");
    if (!(opts.tolerance >= 1e-12 && opts.tolerance <= 1e-4))
        throw ConfigError("boosted-state tolerance must lie in [1e-12, 1e-4]");

    ComplexField u = sech_seed(grid);
    IterationResult r = petviashvili(grid, 0.0, std::move(u), opts);
    if (std::abs(v) > 1e-14) {
        for (const double w : continuation_chain(v)) {
            r = petviashvili(grid, w, std::move(r.u), opts);
            if (!r.converged)
                throw SolverError("boosted continuation stalled at v = " + std::to_string(w));
        }
    } else if (!r.converged) {
        throw SolverError("boosted solve did not converge at v = 0");
    }
    return package_boosted(std::move(r), v);
}

std::vector<MassCurveRow> mass_curve(const Grid& grid, const std::vector<double>& velocities,
                                     const SolverOpts& opts) {
    for (std::size_t i = 0; i + 1 < velocities.size(); ++i)
        if (velocities[i] > velocities[i + 1])
            throw ConfigError("mass-curve velocities must be sorted ascending");
    for (const double v : velocities)
        if (std::abs(v) >= 0.95) throw ConfigError("mass-curve velocities must lie in (-0.95, 0.95)");

    std::vector<MassCurveRow> rows;
    rows.reserve(velocities.size());
    ComplexField warm{grid};
    double warm_v = 0.0;
    bool have_warm = false;
    double prev_mass = 0.0, prev_absv = -1.0;
    bool have_prev = false;

    for (const double v : velocities) {
        MassCurveRow row;
        row.v = v;
        try {
            IterationResult r = have_warm
                ? IterationResult{warm, 0.0, 0, true}
                : petviashvili(grid, 0.0, sech_seed(grid), opts);
            // Walk the velocity gap with continuation sub-steps: 0.1 in the
            // well-conditioned region, 0.05 once |v| exceeds 0.7.
            double w = have_warm ? warm_v : 0.0;
            const double dir = (v >= w) ? 1.0 : -1.0;
            bool solved_at_v = !have_warm && std::abs(v) <= 1e-12;
            while (std::abs(v - w) > 1e-12) {
                solved_at_v = true;
                const double step = (std::max(std::abs(w), std::abs(v)) > 0.7) ? 0.05 : 0.1;
                w = (std::abs(v - w) <= step + 1e-12) ? v : w + dir * step;
                r = petviashvili(grid, w, std::move(r.u), opts);
                if (!r.converged) throw SolverError("row did not converge");
            }
            if (!solved_at_v) {
                r = petviashvili(grid, v, std::move(r.u), opts);
            }
            if (!r.converged) throw SolverError("row did not converge");
            warm = r.u;
            warm_v = v;
            have_warm = true;
            BoostedState st = package_boosted(std::move(r), v);
            row.mass = st.mass;
            row.cv = st.cv;
            row.residual = st.residual_norm;
            row.pohozaev_defect = st.pohozaev_defect;
            row.iterations = st.iterations;
            row.ok = true;
            if (!have_prev) {
                row.monotone_ok = true;
            } else if (std::abs(v) > prev_absv + 1e-12) {
                row.monotone_ok = row.mass < prev_mass;
            } else if (std::abs(std::abs(v) - prev_absv) <= 1e-12) {
                row.monotone_ok = std::abs(row.mass - prev_mass) <= 1e-6 * prev_mass;
            } else {
                row.monotone_ok = row.mass > prev_mass;
            }
            prev_mass = row.mass;
            prev_absv = std::abs(v);
            have_prev = true;
        } catch (const SolverError&) {
            row.ok = false;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace halfwave
