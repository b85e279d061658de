#include "conetree/hyperbolic.hpp"

#include <algorithm>
#include <cmath>

#include "conetree/errors.hpp"

namespace conetree {

double gamma_semi(cplx g, cplx h) {
    const double d = std::norm(g - h);
    return d / (g.imag() * h.imag());
}

double gamma_max(std::span<const cplx> g, std::span<const cplx> h) {
    if (g.size() != h.size()) throw ValidationError("gamma_max: shape mismatch");
    double m = 0;
    for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, gamma_semi(g[i], h[i]));
    return m;
}

double dist_hyperbolic(std::span<const cplx> g, std::span<const cplx> h) {
    return std::acosh(0.5 * gamma_max(g, h) + 1.0);
}

double circle_mod(double alpha) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double a = std::fmod(alpha, two_pi);
    if (a < 0) a += two_pi;          // [0, 2pi)
    return std::min(a, two_pi - a);  // distance to 0 on the circle
}

double radius_for_eps1(double eps0, double delta) {
    if (!(eps0 > 0) || !(delta > 0) || delta >= eps0)
        throw ValidationError("radius_for_eps1: need 0 < delta < eps0");
    return delta * delta / ((eps0 - delta) * eps0);
}

BallGeometry ball_geometry_from_radius(std::span<const cplx> center, double r) {
    if (center.empty()) throw ValidationError("ball_geometry_from_radius: empty center");
    if (r < 0) throw ValidationError("ball_geometry_from_radius: negative radius");
    BallGeometry b;
    b.radius = r;
    b.eps0 = center[0].imag();
    for (auto c : center) b.eps0 = std::min(b.eps0, c.imag());
    if (!(b.eps0 > 0)) throw ValidationError("ball_geometry_from_radius: center not in upper half plane");
    // eps1 solves eps1^2 = r*eps0*(eps0 - eps1); positive root
    b.eps1 = 0.5 * (-r * b.eps0 + std::sqrt(r * r * b.eps0 * b.eps0 + 4.0 * r * b.eps0 * b.eps0));
    b.eps2 = b.eps0 - b.eps1;
    return b;
}

double shift_coeff(cplx h, double lam) {
    const double c = 1.0 + 2.0 * std::abs(lam) / h.imag();
    return c * c;
}

double scale_coeff(cplx h, double lam) {
    if (lam <= -1.0) throw ValidationError("scale_coeff: lam must exceed -1");
    const double c = 1.0 + 2.0 * std::sqrt(2.0) * std::abs(lam) * std::abs(h) / h.imag();
    return c * c;
}

cplx tau_apply(std::span<const cplx> g, std::span<const double> weights) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) acc += weights[i] * g[i];
    return acc;
}

double ContractionQuantities::contraction_sum() const {
    double acc = 0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * c[i] * gammas[i];
    return acc;
}

ContractionQuantities contraction_quantities(std::span<const cplx> g, std::span<const cplx> h,
                                             std::span<const double> edge_weights) {
    const std::size_t n = g.size();
    if (h.size() != n || edge_weights.size() != n)
        throw ValidationError("contraction_quantities: shape mismatch");
    ContractionQuantities q;
    q.p.resize(n);
    q.q.resize(n);
    q.c.resize(n);
    q.gammas.resize(n);
    q.Q.assign(n, std::vector<double>(n, 0.0));
    q.alpha.assign(n, std::vector<double>(n, 0.0));

    double wh = 0, wg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        wh += edge_weights[i] * h[i].imag();
        wg += edge_weights[i] * g[i].imag();
        q.gammas[i] = gamma_semi(g[i], h[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        q.p[i] = edge_weights[i] * h[i].imag() / wh;
        q.q[i] = edge_weights[i] * g[i].imag() / wg;
    }
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            if (g[x] == h[x] || g[y] == h[y]) continue;  // hard-zero convention
            const double num = std::sqrt(g[x].imag() * g[y].imag() * h[x].imag() * h[y].imag() *
                                         q.gammas[x] * q.gammas[y]);
            const double den =
                0.5 * (g[x].imag() * h[y].imag() * q.gammas[y] + g[y].imag() * h[x].imag() * q.gammas[x]);
            q.Q[x][y] = num / den;
            q.alpha[x][y] = std::arg((g[x] - h[x]) * std::conj(g[y] - h[y]));
        }
    }
    for (std::size_t x = 0; x < n; ++x) {
        double acc = 0;
        for (std::size_t v = 0; v < n; ++v) acc += q.q[v] * q.Q[x][v] * std::cos(q.alpha[x][v]);
        q.c[x] = acc;
    }
    return q;
}

} // namespace conetree
