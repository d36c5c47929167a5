#ifndef HALFWAVE_QUADRATURE_HPP
#define HALFWAVE_QUADRATURE_HPP

// Quadrature for integrals int_0^inf g(s) ds with g ~ s^(-3/2) at infinity.
// The substitution s = tan^2(theta) maps to (0, pi/2) where Gauss-Legendre
// converges spectrally; node counts are doubled until the value settles.

#include <functional>
#include <vector>

namespace halfwave {

struct SQuadrature {
    int base_nodes = 64;
    double rel_tol = 1e-8;
    int max_nodes = 4096;
};

// Nodes s_i and weights w_i so that sum w_i g(s_i) ~ int_0^inf g(s) ds.
struct SNodes {
    std::vector<double> s;
    std::vector<double> w;
};

SNodes s_nodes(int node_count);

// Adaptive evaluation of int_0^inf g(s) ds; doubles the node count until the
// relative change drops below quad.rel_tol. Throws SolverError otherwise.
double s_integral(const std::function<double(double)>& g, const SQuadrature& quad);

}  // namespace halfwave

#endif
