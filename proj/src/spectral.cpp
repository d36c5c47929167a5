#include "halfwave/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace halfwave {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

// One cached FFTW plan pair per transform size. Plans are created with
// FFTW_ESTIMATE so results are deterministic across runs.
struct PlanSet {
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

PlanSet& plans_for(std::size_t n) {
    static std::map<std::size_t, PlanSet> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        PlanSet p;
        p.buf = fftw_alloc_complex(n);
        p.fwd = fftw_plan_dft_1d(static_cast<int>(n), p.buf, p.buf, FFTW_FORWARD, FFTW_ESTIMATE);
        p.bwd = fftw_plan_dft_1d(static_cast<int>(n), p.buf, p.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        it = cache.emplace(n, p).first;
    }
    return it->second;
}

std::mutex& transform_mutex() {
    static std::mutex mtx;
    return mtx;
}

std::vector<cplx> run_plan(const std::vector<cplx>& in, bool forward, double scale) {
    const std::size_t n = in.size();
    std::lock_guard<std::mutex> lock(transform_mutex());
    PlanSet& p = plans_for(n);
    std::memcpy(p.buf, in.data(), n * sizeof(fftw_complex));
    fftw_execute(forward ? p.fwd : p.bwd);
    std::vector<cplx> out(n);
    for (std::size_t j = 0; j < n; ++j)
        out[j] = cplx{p.buf[j][0], p.buf[j][1]} * scale;
    return out;
}

// Zero-pad a length-n spectrum to length 2n. The Nyquist coefficient is
// split evenly between +n/2 and -n/2 so real inputs stay real.
std::vector<cplx> pad_spectrum(const std::vector<cplx>& c) {
    const std::size_t n = c.size();
    std::vector<cplx> big(2 * n, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n / 2; ++k) big[k] = c[k];
    for (std::size_t k = 1; k < n / 2; ++k) big[2 * n - k] = c[n - k];
    big[n / 2] = 0.5 * c[n / 2];
    big[2 * n - n / 2] = 0.5 * c[n / 2];
    return big;
}

// Keep only the coarse band [-n/2, n/2) of a length-2n spectrum.
std::vector<cplx> truncate_spectrum(const std::vector<cplx>& big) {
    const std::size_t n = big.size() / 2;
    std::vector<cplx> c(n, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n / 2; ++k) c[k] = big[k];
    for (std::size_t k = 1; k <= n / 2; ++k) c[n - k] = big[2 * n - k];
    return c;
}

void check_edge_decay(const ComplexField& f, const char* op) {
    const double peak = norm_inf(f);
    if (peak == 0.0) return;
    const double edge = std::max(std::abs(f.values.front()), std::abs(f.values.back()));
    if (edge > 1e-6 * peak)
        warnings::emit(std::string(op) +
                       ": field is not negligible at the box edge; x-weighted "
                       "result is polluted by periodic images");
}

}  // namespace

std::vector<cplx> fft(const std::vector<cplx>& in) { return run_plan(in, true, 1.0); }

std::vector<cplx> ifft(const std::vector<cplx>& in) {
    return run_plan(in, false, 1.0 / static_cast<double>(in.size()));
}

ComplexField fractional_derivative(const ComplexField& f, double s) {
    if (s < -1.0) throw ConfigError("fractional derivative order must be >= -1");
    std::vector<cplx> c = fft(f.values);
    if (s < 0.0) {
        double total = 0.0;
        for (const cplx& z : c) total += std::norm(z);
        if (std::norm(c[0]) > 1e-20 * total && total > 0.0)
            throw NumericsError(
                "negative-order derivative of a field with nonzero mean: the "
                "zero mode is unbounded");
        c[0] = 0.0;
    }
    for (std::size_t k = 0; k < f.grid.n; ++k) {
        const double xi = std::abs(f.grid.wavenumber(k));
        if (xi == 0.0)
            c[k] *= (s == 0.0) ? 1.0 : (s > 0.0 ? 0.0 : 1.0);
        else
            c[k] *= std::pow(xi, s);
    }
    return ComplexField{f.grid, ifft(c)};
}

ComplexField derivative(const ComplexField& f) {
    std::vector<cplx> c = fft(f.values);
    for (std::size_t k = 0; k < f.grid.n; ++k) {
        if (k == f.grid.n / 2) {
            c[k] = 0.0;  // unpaired Nyquist mode: keep the operator skew-adjoint
            continue;
        }
        c[k] *= cplx{0.0, f.grid.wavenumber(k)};
    }
    return ComplexField{f.grid, ifft(c)};
}

ComplexField scaling_generator(const ComplexField& f) {
    check_edge_decay(f, "scaling_generator");
    ComplexField df = derivative(f);
    ComplexField out{f.grid};
    for (std::size_t j = 0; j < f.grid.n; ++j)
        out.values[j] = 0.5 * f.values[j] + f.grid.node(j) * df.values[j];
    return out;
}

ConservedTriple conserved(const ComplexField& f) {
    const std::size_t n = f.grid.n;
    const double mode_weight = f.grid.box_length / (static_cast<double>(n) * n);
    std::vector<cplx> c = fft(f.values);

    ConservedTriple out;
    double half_deriv_sq = 0.0;
    cplx momentum{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = f.grid.wavenumber(k);
        const double e = std::norm(c[k]) * mode_weight;
        half_deriv_sq += std::abs(xi) * e;
        if (k != n / 2) momentum += xi * e;  // odd symbol: drop Nyquist
    }
    double mass = 0.0, quartic = 0.0;
    for (const cplx& z : f.values) {
        const double a2 = std::norm(z);
        mass += a2;
        quartic += a2 * a2;
    }
    mass *= f.grid.spacing();
    quartic *= f.grid.spacing();

    out.mass = mass;
    out.energy = 0.5 * half_deriv_sq - 0.25 * quartic;
    if (std::abs(momentum.imag()) > 1e-8 * (mass + 1.0))
        throw NumericsError("momentum quadrature has a non-real part");
    out.momentum = momentum.real();
    return out;
}

double sobolev_norm(const ComplexField& f, double s) {
    if (s < -2.0 || s > 4.0) throw ConfigError("Sobolev order must lie in [-2, 4]");
    const std::size_t n = f.grid.n;
    const double mode_weight = f.grid.box_length / (static_cast<double>(n) * n);
    std::vector<cplx> c = fft(f.values);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = f.grid.wavenumber(k);
        acc += std::pow(1.0 + xi * xi, s) * std::norm(c[k]) * mode_weight;
    }
    return std::sqrt(acc);
}

double homogeneous_sobolev_norm(const ComplexField& f, double s) {
    const std::size_t n = f.grid.n;
    const double mode_weight = f.grid.box_length / (static_cast<double>(n) * n);
    std::vector<cplx> c = fft(f.values);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = std::abs(f.grid.wavenumber(k));
        if (xi == 0.0) continue;
        acc += std::pow(xi, 2.0 * s) * std::norm(c[k]) * mode_weight;
    }
    return std::sqrt(acc);
}

ComplexField resolvent_smooth(const ComplexField& f, double s) {
    if (!(s > 0.0)) throw ConfigError("resolvent smoothing requires s > 0");
    const double amp = std::sqrt(2.0 / kPi);
    std::vector<cplx> c = fft(f.values);
    for (std::size_t k = 0; k < f.grid.n; ++k) {
        const double xi = f.grid.wavenumber(k);
        c[k] *= amp / (xi * xi + s);
    }
    return ComplexField{f.grid, ifft(c)};
}

std::pair<double, double> smoothing_identity(const ComplexField& f, const SQuadrature& quad) {
    const std::size_t n = f.grid.n;
    const double mode_weight = f.grid.box_length / (static_cast<double>(n) * n);
    std::vector<cplx> c = fft(f.values);

    std::vector<double> xi2(n), energy(n);
    double total = 0.0, top = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double xi = f.grid.wavenumber(k);
        xi2[k] = xi * xi;
        energy[k] = std::norm(c[k]) * mode_weight;
        total += energy[k];
        if (std::abs(xi) > (7.0 / 8.0) * (kPi * n / f.grid.box_length)) top += energy[k];
    }
    if (total > 0.0 && top > 1e-10 * total)
        warnings::emit("smoothing_identity: input is not band-limited; the "
                       "s-integral will see spectral truncation");

    double rhs = 0.0;
    for (std::size_t k = 0; k < n; ++k) rhs += std::sqrt(xi2[k]) * energy[k];

    auto integrand = [&](double s) {
        // sqrt(s) * ||grad u_s||^2 evaluated on the Fourier side
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double denom = xi2[k] + s;
            acc += xi2[k] / (denom * denom) * energy[k];
        }
        return std::sqrt(s) * (2.0 / kPi) * acc;
    };
    const double lhs = s_integral(integrand, quad);
    return {lhs, rhs};
}

ComplexField dealiased_triple_product(const ComplexField& f, const ComplexField& g,
                                      const ComplexField& h) {
    require_same_grid(f, g);
    require_same_grid(f, h);
    const std::size_t n = f.grid.n;
    auto fine_values = [n](const ComplexField& a) {
        std::vector<cplx> big = pad_spectrum(fft(a.values));
        std::vector<cplx> vals = ifft(big);
        for (cplx& z : vals) z *= 2.0;  // same coefficients, 2n sample points
        return vals;
    };
    std::vector<cplx> pf = fine_values(f), pg = fine_values(g), ph = fine_values(h);
    for (std::size_t j = 0; j < 2 * n; ++j) pf[j] *= pg[j] * ph[j];
    std::vector<cplx> big = fft(pf);
    for (cplx& z : big) z *= 0.5;  // back to the coarse-grid DFT normalization
    return ComplexField{f.grid, ifft(truncate_spectrum(big))};
}

std::vector<double> dealiased_abs2(const ComplexField& u) {
    const std::size_t n = u.grid.n;
    std::vector<cplx> big = pad_spectrum(fft(u.values));
    std::vector<cplx> vals = ifft(big);
    for (cplx& z : vals) z *= 2.0;
    for (std::size_t j = 0; j < 2 * n; ++j) vals[j] = std::norm(vals[j]);
    std::vector<cplx> spec = fft(vals);
    for (cplx& z : spec) z *= 0.5;
    std::vector<cplx> coarse = ifft(truncate_spectrum(spec));
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = coarse[j].real();
    return out;
}

ComplexField zoom(const ComplexField& u, double lambda0, double x0, double gamma0) {
    if (!(lambda0 >= 1e-6 && lambda0 <= 1e6))
        throw ConfigError("zoom scale outside [1e-6, 1e6]");
    const std::size_t n = u.grid.n;
    const double L = u.grid.box_length;
    const cplx phase0 = std::polar(1.0, gamma0);

    if (lambda0 == 1.0 && x0 == 0.0) {
        ComplexField out = u;
        for (cplx& z : out.values) z *= phase0;
        return out;
    }

    // Evaluate the trigonometric interpolant of u at the uniform points
    // y_j = lambda0*x_j + x0, which is a chirp-z transform: with signed mode
    // numbers m and w(t) = exp(i pi lambda0 t / n),
    //   sum_m c_m W^(m j) = w(j^2) sum_m [c_m e^(2 pi i m delta/n) w(m^2)]
    //                              * w(-(j-m)^2),
    // a linear convolution done by three FFTs of length 2n (Bluestein).
    const std::vector<cplx> c = fft(u.values);
    const double dx = u.grid.spacing();
    const double delta = (0.5 * L * (1.0 - lambda0) + x0) / dx;
    const double theta_m = 2.0 * kPi * delta / static_cast<double>(n);
    const double chirp = kPi * lambda0 / static_cast<double>(n);
    const std::size_t m2 = 2 * n;
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    const auto sn = static_cast<std::ptrdiff_t>(n);

    std::vector<cplx> f(m2, cplx{0.0, 0.0}), gker(m2, cplx{0.0, 0.0});
    for (std::ptrdiff_t m = -half; m < half; ++m) {
        const std::size_t k = static_cast<std::size_t>(m >= 0 ? m : m + sn);
        const double md = static_cast<double>(m);
        const std::size_t slot = static_cast<std::size_t>(m >= 0 ? m : m + 2 * sn);
        f[slot] = c[k] * std::polar(1.0, theta_m * md + chirp * md * md);
    }
    for (std::ptrdiff_t d = -half + 1; d < 3 * half; ++d) {
        const double dd = static_cast<double>(d);
        const std::size_t slot = static_cast<std::size_t>(d >= 0 ? d : d + 2 * sn);
        gker[slot] = std::polar(1.0, -chirp * dd * dd);
    }
    std::vector<cplx> fs = fft(f), gs = fft(gker);
    for (std::size_t k = 0; k < m2; ++k) fs[k] *= gs[k];
    const std::vector<cplx> h = ifft(fs);

    // u stands for a decaying line function, so points mapped outside the
    // box read zero instead of the periodic image (otherwise compressing
    // would drag spurious copies of the field into view).
    const cplx amp = std::sqrt(lambda0) * phase0 / static_cast<double>(n);
    ComplexField out{u.grid};
    for (std::size_t j = 0; j < n; ++j) {
        const double y = lambda0 * u.grid.node(j) + x0;
        if (y < -0.5 * L || y >= 0.5 * L) {
            out.values[j] = 0.0;
            continue;
        }
        const double jd = static_cast<double>(j);
        out.values[j] = amp * std::polar(1.0, chirp * jd * jd) * h[j];
    }
    return out;
}

namespace {
double tail_fit(const std::vector<double>& xs, const std::vector<double>& amps) {
    // least squares slope of log(amp) against log(x)
    const std::size_t m = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double lx = std::log(xs[i]), ly = std::log(amps[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = m * sxx - sx * sx;
    return -(m * sxy - sx * sy) / denom;
}
}  // namespace

double tail_exponent(const ComplexField& f, double x_lo, double x_hi) {
    if (!(x_lo > 0.0 && x_hi > x_lo)) throw ConfigError("tail window must satisfy 0 < lo < hi");
    if (x_hi > 0.5 * f.grid.box_length) throw ConfigError("tail window exceeds the box");
    std::vector<double> xs, amps;
    for (std::size_t j = 0; j < f.grid.n; ++j) {
        const double x = f.grid.node(j);
        if (x < x_lo || x > x_hi) continue;
        const double a = std::abs(f.values[j]);
        if (a < 10.0 * 2.2e-16) continue;
        xs.push_back(x);
        amps.push_back(a);
    }
    if (xs.size() < 16) throw ConfigError("tail window covers fewer than 16 usable nodes");
    return tail_fit(xs, amps);
}

double tail_exponent(const Grid& g, const std::vector<double>& f, double x_lo, double x_hi) {
    ComplexField tmp{g};
    for (std::size_t j = 0; j < g.n; ++j) tmp.values[j] = f[j];
    return tail_exponent(tmp, x_lo, x_hi);
}

}  // namespace halfwave
