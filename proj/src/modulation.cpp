#include "halfwave/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "halfwave/spectral.hpp"

namespace halfwave {

namespace {

// The five complex direction fields of the orthogonality conditions at the
// profile point (b, v): each pairing is Im (eps, z) with z one of
//   Lambda Q_P, d_b Q_P, rho_1 + i rho_2, grad Q_P, d_v Q_P.
// The parameter derivatives are exact on the polynomial ansatz; rho_2 is the
// (b, v)-weighted combination of its two stored generators.
std::array<ComplexField, 5> pairing_directions(const ProfileSet& ps,
                                               const ProfileParams& params) {
    const double b = params.b, v = params.v;
    const Grid& g = ps.q.q.grid;

    ComplexField qp = assemble_qp(ps, params);

    ComplexField db{g}, dv{g}, rho{g};
    for (std::size_t j = 0; j < g.n; ++j) {
        db.values[j] =
            cplx{v * ps.f2.values[j].real() + 2.0 * b * ps.t2.values[j].real() +
                     4.0 * b * b * b * ps.r40.values[j].real(),
                 ps.s1.values[j].real() + 3.0 * b * b * ps.r30.values[j].real() +
                     2.0 * b * v * ps.r21.values[j].real()};
        dv.values[j] = cplx{b * ps.f2.values[j].real() + 2.0 * v * ps.h2.values[j].real(),
                            ps.g1.values[j].real() + b * b * ps.r21.values[j].real()};
        rho.values[j] = cplx{ps.rho1.values[j].real(),
                             b * ps.rho2_b.values[j].real() + v * ps.rho2_v.values[j].real()};
    }

    return {scaling_generator(qp), std::move(db), std::move(rho), derivative(qp),
            std::move(dv)};
}

ComplexField residual_field(const ComplexField& u, const ProfileSet& ps,
                            const ModulationState& st) {
    // eps(y) = lambda^(1/2) u(lambda y + alpha) e^(-i gamma) - Q_P(y)
    ComplexField eps = zoom(u, st.lambda, st.alpha, -st.gamma);
    const ComplexField qp = assemble_qp(ps, {st.b, st.v});
    for (std::size_t j = 0; j < eps.grid.n; ++j) eps.values[j] -= qp.values[j];
    return eps;
}

std::array<double, 5> pairings_of(const ComplexField& eps, const ProfileSet& ps,
                                  const ProfileParams& params) {
    const std::array<ComplexField, 5> dirs = pairing_directions(ps, params);
    std::array<double, 5> sigma{};
    for (int i = 0; i < 5; ++i) sigma[i] = inner(eps, dirs[i]).imag();
    return sigma;
}

bool parameters_admissible(const Eigen::Matrix<double, 5, 1>& th) {
    return th[0] > 1e-6 && th[0] < 1e6 && std::abs(th[3]) <= 2.0 && std::abs(th[4]) <= 0.95;
}

// Derivative of the Lagrange interpolant through (x_i, y_i) at the node x_k.
double lagrange_derivative(const std::vector<double>& x, const std::vector<double>& y,
                           std::size_t lo, std::size_t count, std::size_t k) {
    double d = 0.0;
    for (std::size_t i = lo; i < lo + count; ++i) {
        if (i == k) {
            double sum = 0.0;
            for (std::size_t j = lo; j < lo + count; ++j)
                if (j != k) sum += 1.0 / (x[k] - x[j]);
            d += y[i] * sum;
        } else {
            double prod = 1.0 / (x[i] - x[k]);
            for (std::size_t j = lo; j < lo + count; ++j)
                if (j != i && j != k) prod *= (x[k] - x[j]) / (x[i] - x[j]);
            d += y[i] * prod;
        }
    }
    return d;
}

// Centered-when-possible stencil derivative of y(x) at index k.
double stencil_derivative(const std::vector<double>& x, const std::vector<double>& y,
                          std::size_t k, std::size_t width) {
    const std::size_t m = x.size();
    width = std::min(width, m);
    if (width < 2) return 0.0;
    std::size_t lo = k >= (width - 1) / 2 ? k - (width - 1) / 2 : 0;
    lo = std::min(lo, m - width);
    return lagrange_derivative(x, y, lo, width, k);
}

// Quintic blend of the localization weight's derivative on (1, 2): matches
// phi'(x) = x (value, slope, curvature) at x = 1 and phi'(x) = 3 - e^(-x)
// at x = 2.
const std::array<double, 3>& blend_coefficients() {
    static const std::array<double, 3> c = [] {
        const double e2 = std::exp(-2.0);
        const double p1 = 3.0 - e2 - 2.0;  // p(1) minus the 1 + t part
        const double m1 = e2 - 1.0;        // p'(1) minus the slope 1
        const double a1 = -e2;             // p''(1)
        Eigen::Matrix3d M;
        M << 1.0, 1.0, 1.0, 3.0, 4.0, 5.0, 6.0, 12.0, 20.0;
        const Eigen::Vector3d rhs{p1, m1, a1};
        const Eigen::Vector3d sol = M.fullPivLu().solve(rhs);
        return std::array<double, 3>{sol[0], sol[1], sol[2]};
    }();
    return c;
}

}  // namespace

double phi_prime(double x) {
    const double a = std::abs(x);
    const double sign = x < 0.0 ? -1.0 : 1.0;
    if (a <= 1.0) return x;
    if (a >= 2.0) return sign * (3.0 - std::exp(-a));
    const auto& c = blend_coefficients();
    const double t = a - 1.0;
    const double p =
        1.0 + t + t * t * t * (c[0] + t * (c[1] + t * c[2]));
    return sign * p;
}

double phi_second(double x) {
    const double a = std::abs(x);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return std::exp(-a);
    const auto& c = blend_coefficients();
    const double t = a - 1.0;
    return 1.0 + t * t * (3.0 * c[0] + t * (4.0 * c[1] + t * 5.0 * c[2]));
}

std::array<double, 5> orthogonality_pairings(const ComplexField& u, const ProfileSet& ps,
                                             const ModulationState& params) {
    require_same_grid(u, ps.q.q);
    const ComplexField eps = residual_field(u, ps, params);
    return pairings_of(eps, ps, {params.b, params.v});
}

ModulationState decompose(const ComplexField& u, const ProfileSet& ps,
                          const ModulationState& guess, double newton_tol,
                          int max_iterations) {
    require_same_grid(u, ps.q.q);
    if (!(guess.lambda > 0.0))
        throw ConfigError("decompose: guess scale must be positive");
    check_finite(u, "decompose input");

    const double scale = ps.q.mass;  // ||Q||^2 convergence scale

    Eigen::Matrix<double, 5, 1> th;
    th << guess.lambda, guess.alpha, guess.gamma, guess.b, guess.v;
    if (!parameters_admissible(th))
        throw ConfigError("decompose: guess parameters out of bounds");

    auto state_of = [](const Eigen::Matrix<double, 5, 1>& p) {
        ModulationState st;
        st.lambda = p[0];
        st.alpha = p[1];
        st.gamma = p[2];
        st.b = p[3];
        st.v = p[4];
        return st;
    };
    auto sigma_at = [&](const Eigen::Matrix<double, 5, 1>& p) {
        const ModulationState st = state_of(p);
        const ComplexField eps = residual_field(u, ps, st);
        return pairings_of(eps, ps, {st.b, st.v});
    };

    for (int it = 0; it < max_iterations; ++it) {
        const std::array<double, 5> sig = sigma_at(th);
        double res = 0.0;
        for (const double s : sig) res = std::max(res, std::abs(s));
        if (!std::isfinite(res))
            throw SolverError("decompose: orthogonality pairings became non-finite");
        if (res <= newton_tol * scale) {
            ModulationState st = state_of(th);
            st.eps = residual_field(u, ps, st);
            for (int i = 0; i < 5; ++i) st.ortho_residuals[i] = sig[i];
            return st;
        }

        // forward-difference Jacobian in (lambda, alpha, gamma, b, v)
        Eigen::Matrix<double, 5, 5> J;
        for (int j = 0; j < 5; ++j) {
            const double h = 1e-6 * std::max(std::abs(th[j]), 1.0);
            Eigen::Matrix<double, 5, 1> tp = th;
            tp[j] += h;
            const std::array<double, 5> sp = sigma_at(tp);
            for (int i = 0; i < 5; ++i) J(i, j) = (sp[i] - sig[i]) / h;
        }
        Eigen::Matrix<double, 5, 1> rhs;
        for (int i = 0; i < 5; ++i) rhs[i] = sig[i];
        const Eigen::Matrix<double, 5, 1> delta = J.fullPivLu().solve(rhs);
        if (!delta.allFinite())
            throw SolverError("decompose: singular orthogonality Jacobian");

        // keep the parameters in the admissible region by damping the step
        double damping = 1.0;
        Eigen::Matrix<double, 5, 1> next = th - delta;
        int backtrack = 0;
        while (!parameters_admissible(next)) {
            damping *= 0.5;
            next = th - damping * delta;
            if (++backtrack > 40)
                throw SolverError("decompose: Newton step left the parameter region");
        }
        th = next;
    }
    throw SolverError("decompose: Newton did not converge in " +
                      std::to_string(max_iterations) + " iterations");
}

ModulationSeries track(const Trajectory& traj, const ProfileSet& ps,
                       const ModulationState& initial_guess) {
    ModulationSeries out;
    const std::size_t m = traj.snapshots.size();
    if (m == 0) return out;
    if (traj.frame_scales.size() != m || traj.frame_shifts.size() != m)
        throw ConfigError("track: trajectory frame bookkeeping is incomplete");

    ModulationState guess = initial_guess;  // warm start in frame coordinates
    for (std::size_t i = 0; i < m; ++i) {
        ModulationState frame_state;
        try {
            frame_state = decompose(traj.snapshots[i].second, ps, guess);
        } catch (const SolverError&) {
            break;
        }
        guess = frame_state;
        guess.eps = ComplexField{};  // the warm start only carries parameters

        ModulationState phys = frame_state;
        phys.lambda = traj.frame_scales[i] * frame_state.lambda;
        phys.alpha = traj.frame_scales[i] * frame_state.alpha + traj.frame_shifts[i];
        out.t.push_back(traj.snapshots[i].first);
        out.states.push_back(std::move(phys));
        ++out.valid_count;
    }

    const std::size_t k = out.valid_count;
    out.s.assign(k, 0.0);
    for (std::size_t i = 1; i < k; ++i)
        out.s[i] = out.s[i - 1] +
                   0.5 * (1.0 / out.states[i - 1].lambda + 1.0 / out.states[i].lambda) *
                       (out.t[i] - out.t[i - 1]);

    std::vector<double> lam(k), alp(k), gam(k), bb(k), vv(k);
    for (std::size_t i = 0; i < k; ++i) {
        lam[i] = out.states[i].lambda;
        alp[i] = out.states[i].alpha;
        gam[i] = out.states[i].gamma;
        bb[i] = out.states[i].b;
        vv[i] = out.states[i].v;
    }

    out.mod.assign(k, {});
    out.mod_error.assign(k, {});
    out.mod_scale.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        const double lambda = lam[i], b = bb[i], v = vv[i];
        const double en2 = norm_l2(out.states[i].eps);
        out.mod_scale[i] = lambda * lambda + b * b * b * b + v * v + en2 * en2;
        if (k < 3) continue;
        std::array<double, 5> law3{}, law5{};
        for (int w = 0; w < 2; ++w) {
            const std::size_t width = w == 0 ? 3 : 5;
            const double b_s = stencil_derivative(out.s, bb, i, width);
            const double g_s = stencil_derivative(out.s, gam, i, width);
            const double l_s = stencil_derivative(out.s, lam, i, width);
            const double a_s = stencil_derivative(out.s, alp, i, width);
            const double v_s = stencil_derivative(out.s, vv, i, width);
            std::array<double, 5>& law = w == 0 ? law3 : law5;
            law = {b_s + 0.5 * b * b, g_s - 1.0, l_s / lambda + b, a_s / lambda - v,
                   v_s + b * v};
        }
        out.mod[i] = law3;
        for (int c = 0; c < 5; ++c) out.mod_error[i][c] = std::abs(law3[c] - law5[c]);
    }
    return out;
}

ComplexField minimal_mass_initial_data(const ProfileSet& ps, double t_n, double E0,
                                       double P0, double gamma0, double x0) {
    if (!(E0 > 0.0)) throw ConfigError("minimal mass data: E0 must be positive");
    if (!(t_n < 0.0)) throw ConfigError("minimal mass data: t_n must be negative");
    const double c0sq = ps.e1 / E0;
    const double c0 = std::sqrt(c0sq);
    const double d0 = P0 / ps.p1;

    const double b = -t_n / (2.0 * c0sq);
    const double lambda = t_n * t_n / (4.0 * c0sq);
    const double gamma = gamma0 - 4.0 * c0sq / t_n;
    const double v = d0 * t_n * t_n / (2.0 * c0);

    const ComplexField qp = assemble_qp(ps, {b, v});
    return zoom(qp, 1.0 / lambda, -x0 / lambda, gamma);
}

double virial_value(const ComplexField& ut, const ComplexField& w,
                    const ModulationState& state, const VirialConfig& cfg) {
    require_same_grid(ut, w);
    const Grid& g = ut.grid;
    const double dx = g.spacing();
    const double lambda = state.lambda;
    if (!(lambda > 0.0)) throw ConfigError("virial: scale must be positive");

    const double hom = homogeneous_sobolev_norm(ut, 0.5);
    const double mass = norm_l2(ut);
    double value = 0.5 * hom * hom + 0.5 * mass * mass / lambda;

    // - int [ F(w + ut) - F(w) - Re(f(w) conj(ut)) ], F(u) = |u|^4/4
    double quartic = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const cplx wj = w.values[j], uj = ut.values[j];
        const double full = std::norm(wj + uj);
        const double base = std::norm(wj);
        quartic += 0.25 * (full * full - base * base) -
                   std::real(base * wj * std::conj(uj));
    }
    value -= dx * quartic;

    // (b/2) Im int A phi'((x - alpha)/(A lambda)) (grad ut) conj(ut)
    const ComplexField grad = derivative(ut);
    double flux = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double arg = (g.node(j) - state.alpha) / (cfg.A * lambda);
        flux += cfg.A * phi_prime(arg) *
                std::imag(grad.values[j] * std::conj(ut.values[j]));
    }
    value += 0.5 * state.b * dx * flux;
    return value;
}

namespace {

// One localized form: the phi''-weighted smoothing energy plus the mass term
// minus the Q^2 potential with coefficient c.
double one_localized_form(const ComplexField& part, const ComplexField& q, double c,
                          double A, const VirialConfig& cfg) {
    const Grid& g = part.grid;
    const double dx = g.spacing();

    auto weighted_gradient = [&](double s) {
        const ComplexField grad = derivative(resolvent_smooth(part, s));
        double acc = 0.0;
        for (std::size_t j = 0; j < g.n; ++j)
            acc += phi_second(g.node(j) / A) * std::norm(grad.values[j]);
        return dx * acc;
    };
    const double smoothing =
        s_integral([&](double s) { return std::sqrt(s) * weighted_gradient(s); }, cfg.squad);

    double local = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double f2 = std::norm(part.values[j]);
        const double q2 = std::norm(q.values[j]);
        local += f2 - c * q2 * f2;
    }
    return smoothing + dx * local;
}

}  // namespace

std::pair<double, double> localized_forms(const ComplexField& eps, const GroundState& q,
                                          double A, const VirialConfig& cfg) {
    require_same_grid(eps, q.q);
    if (!(A >= 1.0)) throw ConfigError("localized forms: A must be >= 1");
    const Grid& g = eps.grid;
    ComplexField e1{g}, e2{g};
    for (std::size_t j = 0; j < g.n; ++j) {
        e1.values[j] = cplx{eps.values[j].real(), 0.0};
        e2.values[j] = cplx{eps.values[j].imag(), 0.0};
    }
    return {one_localized_form(e1, q.q, 3.0, A, cfg),
            one_localized_form(e2, q.q, 1.0, A, cfg)};
}

double localized_form_minimum(const GroundState& q, OperatorKind kind, double A,
                              const std::vector<ComplexField>& ortho) {
    const Grid& g = q.q.grid;
    if (g.n > 4096)
        throw ConfigError("localized form minimum: dense eigensolve limited to n <= 4096");
    if (!(A >= 1.0)) throw ConfigError("localized form minimum: A must be >= 1");
    const std::size_t n = g.n;
    const double dx = g.spacing();
    const double c = kind == OperatorKind::plus ? 3.0 : 1.0;

    // frequency samples of the two weights
    std::vector<cplx> wphi(n), wpot(n);
    for (std::size_t j = 0; j < n; ++j) {
        wphi[j] = cplx{phi_second(g.node(j) / A), 0.0};
        wpot[j] = cplx{1.0 - c * std::norm(q.q.values[j]), 0.0};
    }
    const std::vector<cplx> cphi = fft(wphi);
    const std::vector<cplx> cpot = fft(wpot);
    auto weight = [&](const std::vector<cplx>& cw, std::size_t k_row, std::size_t k_col) {
        // dx * sum_j w_j e^{2 pi i (k_col - k_row) j / n}
        const std::size_t m = (k_col + n - k_row) % n;
        return dx * cw[(n - m) % n];
    };

    // dense Hermitian form in Fourier coefficients: the s-integral of the
    // smoothing kernel collapses to 2 xi eta / (|xi| + |eta|)
    std::vector<double> xi(n);
    for (std::size_t k = 0; k < n; ++k)
        xi[k] = (k == n / 2) ? 0.0 : g.wavenumber(k);  // Nyquist treated as in derivative()
    Eigen::MatrixXcd H(n, n);
    const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            const double denom = std::abs(xi[k]) + std::abs(xi[l]);
            const double kernel = denom > 0.0 ? 2.0 * xi[k] * xi[l] / denom : 0.0;
            H(k, l) = inv_n2 * (kernel * weight(cphi, k, l) + weight(cpot, k, l));
        }
    }

    // constraint complement in frequency space
    Eigen::MatrixXcd V;
    if (ortho.empty()) {
        V = Eigen::MatrixXcd::Identity(n, n);
    } else {
        Eigen::MatrixXcd C(n, ortho.size());
        for (std::size_t i = 0; i < ortho.size(); ++i) {
            require_same_grid(ortho[i], q.q);
            const std::vector<cplx> ci = fft(ortho[i].values);
            for (std::size_t k = 0; k < n; ++k) C(k, i) = ci[k];
        }
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(C);
        const Eigen::MatrixXcd full = qr.householderQ();
        V = full.rightCols(n - ortho.size());
    }

    const Eigen::MatrixXcd projected =
        (static_cast<double>(n) / dx) * (V.adjoint() * H * V);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(projected,
                                                       Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw SolverError("localized form minimum: eigensolve failed");
    return es.eigenvalues().minCoeff();
}

}  // namespace halfwave
