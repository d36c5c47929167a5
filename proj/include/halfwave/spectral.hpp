#ifndef HALFWAVE_SPECTRAL_HPP
#define HALFWAVE_SPECTRAL_HPP

// Fourier-multiplier machinery: the nonlocal derivative D^s, the spatial
// derivative, the scaling generator Lambda, resolvent smoothing, conserved
// quantities, Sobolev norms and dealiased products.

#include <utility>

#include "halfwave/field.hpp"
#include "halfwave/quadrature.hpp"

namespace halfwave {

// Unnormalized forward DFT and 1/n-normalized inverse, FFTW bin ordering.
std::vector<cplx> fft(const std::vector<cplx>& in);
std::vector<cplx> ifft(const std::vector<cplx>& in);

// |xi|^s multiplier. For s < 0 the zero mode must vanish (relative to the
// field norm), otherwise the unbounded mode is reported as an error.
ComplexField fractional_derivative(const ComplexField& f, double s);

// d/dx with the Nyquist mode zeroed so the operator stays skew-adjoint.
ComplexField derivative(const ComplexField& f);

// Lambda f = f/2 + x f'. Warns (does not fail) when |f| at the box edge is
// not negligible, since x*f' is then polluted by the periodic images.
ComplexField scaling_generator(const ComplexField& f);

struct ConservedTriple {
    double mass = 0.0;
    double energy = 0.0;
    double momentum = 0.0;
};

// mass = int |u|^2, energy = 1/2 int |D^(1/2)u|^2 - 1/4 int |u|^4,
// momentum = int (-i u') conj(u) (the imaginary part must vanish).
ConservedTriple conserved(const ComplexField& f);

double sobolev_norm(const ComplexField& f, double s);
double homogeneous_sobolev_norm(const ComplexField& f, double s);

// sqrt(2/pi) (-Laplacian + s)^{-1}, s > 0.
ComplexField resolvent_smooth(const ComplexField& f, double s);

// Evaluates both sides of the subordination identity
//   int_0^inf sqrt(s) ||grad u_s||^2 ds = ||D^(1/2) u||^2
// returning (quadrature value, Fourier-side value).
std::pair<double, double> smoothing_identity(const ComplexField& f, const SQuadrature& quad);

// Pointwise f*g*h with 2x zero padding, exact for band-limited inputs.
ComplexField dealiased_triple_product(const ComplexField& f, const ComplexField& g,
                                      const ComplexField& h);

// Dealiased |u|^2 (real-valued samples), used by the nonlinear substep.
std::vector<double> dealiased_abs2(const ComplexField& u);

// lambda0^(1/2) u(lambda0 x + x0) e^(i gamma0) resampled onto u's grid by
// direct trigonometric evaluation (exact for band-limited input).
ComplexField zoom(const ComplexField& u, double lambda0, double x0, double gamma0);

// Least-squares slope of log|f| vs log|x| over [x_lo, x_hi], sign-flipped so
// an algebraic tail <x>^-p reports p.
double tail_exponent(const ComplexField& f, double x_lo, double x_hi);
double tail_exponent(const Grid& g, const std::vector<double>& f, double x_lo, double x_hi);

}  // namespace halfwave

#endif
