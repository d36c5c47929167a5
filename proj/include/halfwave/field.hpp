#ifndef HALFWAVE_FIELD_HPP
#define HALFWAVE_FIELD_HPP

// Periodic grid and complex field containers. The box [-L/2, L/2) stands in
// for the whole line, so everything downstream assumes fields decay well
// before the box edge.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace halfwave {

using cplx = std::complex<double>;

// Bad user-supplied parameters (grid sizes, velocities, tolerances, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An iterative solver failed to converge or was handed an unsolvable system.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The numbers themselves went bad: NaN, violated identity, corrupt state.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Grid {
    std::size_t n = 0;          // number of nodes, power of two
    double box_length = 0.0;    // L; box is [-L/2, L/2)

    double spacing() const { return box_length / static_cast<double>(n); }

    double node(std::size_t j) const {
        return -0.5 * box_length + static_cast<double>(j) * spacing();
    }

    // Wavenumber for FFT bin k (non-negative frequencies first, then the
    // negative ones). Bin n/2 is the unpaired Nyquist mode.
    double wavenumber(std::size_t k) const {
        const double two_pi = 6.283185307179586476925286766559;
        long long kk = static_cast<long long>(k);
        if (k >= n / 2) kk -= static_cast<long long>(n);
        return two_pi * static_cast<double>(kk) / box_length;
    }

    bool operator==(const Grid& o) const {
        return n == o.n && box_length == o.box_length;
    }
};

Grid make_grid(std::size_t n, double box_length);

struct ComplexField {
    Grid grid;
    std::vector<cplx> values;

    ComplexField() = default;
    explicit ComplexField(const Grid& g) : grid(g), values(g.n, cplx{0.0, 0.0}) {}
    ComplexField(const Grid& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.n)
            throw ConfigError("field length does not match grid");
    }
};

// L2 inner product (f, g) = integral of conj(f) g; trapezoid rule is exact
// for periodic data on a uniform grid.
cplx inner(const ComplexField& f, const ComplexField& g);

// Real-valued inner product for the real component fields used by the
// profile hierarchy: dx * sum(f * g).
double inner(const Grid& g, const std::vector<double>& a, const std::vector<double>& b);

double norm_l2(const ComplexField& f);
double norm_l2(const Grid& g, const std::vector<double>& a);
double norm_inf(const ComplexField& f);

void check_finite(const ComplexField& f, const std::string& context);

void require_same_grid(const ComplexField& a, const ComplexField& b);

// Accumulating warning sink; spectral operators that multiply by x report
// boundary-contamination here instead of hard-failing.
namespace warnings {
void emit(const std::string& message);
// Returns the previous handler. Pass nullptr to restore stderr reporting.
using Handler = void (*)(const std::string&);
Handler set_handler(Handler h);
}  // namespace warnings

}  // namespace halfwave

#endif
