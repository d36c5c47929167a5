#include "halfwave/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>

#include "halfwave/field.hpp"

namespace halfwave {

SNodes s_nodes(int node_count) {
    // Gauss-Legendre on theta in (0, pi/2), then s = tan^2(theta),
    // ds = 2 tan(theta) sec^2(theta) dtheta.
    const double half_pi = 1.570796326794896619231321691640;
    gsl_integration_glfixed_table* table =
        gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(node_count));
    SNodes out;
    out.s.resize(node_count);
    out.w.resize(node_count);
    for (int i = 0; i < node_count; ++i) {
        double theta, wt;
        gsl_integration_glfixed_point(0.0, half_pi, static_cast<std::size_t>(i), &theta, &wt,
                                      table);
        const double t = std::tan(theta);
        const double sec2 = 1.0 + t * t;
        out.s[i] = t * t;
        out.w[i] = wt * 2.0 * t * sec2;
    }
    gsl_integration_glfixed_table_free(table);
    return out;
}

double s_integral(const std::function<double(double)>& g, const SQuadrature& quad) {
    double prev = 0.0;
    bool have_prev = false;
    for (int m = quad.base_nodes; m <= quad.max_nodes; m *= 2) {
        const SNodes nodes = s_nodes(m);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.s.size(); ++i) acc += nodes.w[i] * g(nodes.s[i]);
        if (have_prev) {
            const double scale = std::max(std::abs(acc), std::abs(prev));
            if (scale == 0.0 || std::abs(acc - prev) <= quad.rel_tol * scale) return acc;
        }
        prev = acc;
        have_prev = true;
    }
    throw SolverError("s-quadrature did not settle at the maximum node count");
}

}  // namespace halfwave
