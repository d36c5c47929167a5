#include "halfwave/field.hpp"

#include <cmath>
#include <cstdio>

namespace halfwave {

Grid make_grid(std::size_t n, double box_length) {
    if (n < 8 || n > (std::size_t{1} << 24))
        throw ConfigError("grid size must lie in [8, 2^24]");
    if ((n & (n - 1)) != 0)
        throw ConfigError("grid size must be a power of two");
    if (!(box_length >= 1.0 && box_length <= 1e6))
        throw ConfigError("box length must lie in [1, 1e6]");
    return Grid{n, box_length};
}

cplx inner(const ComplexField& f, const ComplexField& g) {
    require_same_grid(f, g);
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < f.grid.n; ++j)
        acc += std::conj(f.values[j]) * g.values[j];
    return acc * f.grid.spacing();
}

double inner(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != g.n || b.size() != g.n)
        throw ConfigError("real inner product: length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) acc += a[j] * b[j];
    return acc * g.spacing();
}

double norm_l2(const ComplexField& f) {
    double acc = 0.0;
    for (const cplx& z : f.values) acc += std::norm(z);
    return std::sqrt(acc * f.grid.spacing());
}

double norm_l2(const Grid& g, const std::vector<double>& a) {
    double acc = 0.0;
    for (double x : a) acc += x * x;
    return std::sqrt(acc * g.spacing());
}

double norm_inf(const ComplexField& f) {
    double m = 0.0;
    for (const cplx& z : f.values) m = std::max(m, std::abs(z));
    return m;
}

void check_finite(const ComplexField& f, const std::string& context) {
    for (const cplx& z : f.values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw NumericsError("non-finite field values in " + context);
}

void require_same_grid(const ComplexField& a, const ComplexField& b) {
    if (!(a.grid == b.grid)) throw ConfigError("fields live on different grids");
}

namespace warnings {

namespace {
void default_handler(const std::string& message) {
    std::fprintf(stderr, "[halfwave] warning: %s\n", message.c_str());
}
Handler g_handler = &default_handler;
}  // namespace

void emit(const std::string& message) { g_handler(message); }

Handler set_handler(Handler h) {
    Handler old = g_handler;
    g_handler = (h != nullptr) ? h : &default_handler;
    return old;
}

}  // namespace warnings

}  // namespace halfwave
