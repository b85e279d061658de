#pragma once

#include <complex>
#include <span>
#include <vector>

namespace conetree {

using cplx = std::complex<double>;

// gamma(g,h) = |g-h|^2 / (Im g * Im h), the hyperbolic semi-metric on the
// upper half plane. Fails the triangle inequality; dist = acosh(gamma/2 + 1)
// is the genuine Poincare metric.
double gamma_semi(cplx g, cplx h);
double gamma_max(std::span<const cplx> g, std::span<const cplx> h);
double dist_hyperbolic(std::span<const cplx> g, std::span<const cplx> h);

// wrap an angle to (-pi, pi] and take |.|; the circle metric d_S1(alpha, 0)
double circle_mod(double alpha);

/// Geometry of a gamma-ball of radius r around a center with min component
/// imaginary part eps0: eps1 = min Euclidean distance from the boundary to the
/// center, eps2 = min imaginary part on the ball. Satisfies eps1 + eps2 = eps0
/// and eps1^2 = r * eps0 * eps2.
struct BallGeometry {
    double eps0 = 0;
    double eps1 = 0;
    double eps2 = 0;
    double radius = 0;
};

BallGeometry ball_geometry_from_radius(std::span<const cplx> center, double r);

/// Radius r with eps1(r) = delta: r = delta^2 / ((eps0 - delta) * eps0).
/// Requires 0 < delta < eps0.
double radius_for_eps1(double eps0, double delta);

// Substitute triangle-inequality coefficients:
//   gamma(g + lam, h)       <= c0 * gamma(g,h) + (c0 - 1),   c0 = (1 + 2|lam|/Im h)^2
//   gamma((1+lam) g, h)     <= (c1 * gamma(g,h) + (c1 - 1)) / (1 + lam),
//                              c1 = (1 + 2*sqrt(2)*|lam||h|/Im h)^2, lam > -1
double shift_coeff(cplx h, double lam);
double scale_coeff(cplx h, double lam);

/// Weighted-average map over one sphere: tau(g) = sum_y w_y g_y with w = |t|^2.
cplx tau_apply(std::span<const cplx> g, std::span<const double> weights);

/// The contraction bookkeeping of the averaging map tau on one sphere:
///   p_x = w_x Im h_x / sum, q_x = w_x Im g_x / sum,
///   Q_{x,y} in [0,1] geometric/arithmetic mean ratio (0 where g or h agree),
///   alpha_{x,y} = arg((g_x-h_x) conj(g_y-h_y)) in (-pi, pi],
///   c_x = sum_v q_v Q_{x,v} cos alpha_{x,v}.
/// These reassemble the exact identity
///   gamma(tau(g), tau(h)) = sum_x p_x c_x gamma(g_x, h_x).
struct ContractionQuantities {
    std::vector<double> p, q, c;
    std::vector<double> gammas;                // per index gamma(g_x, h_x)
    std::vector<std::vector<double>> Q;        // symmetric, [0,1]
    std::vector<std::vector<double>> alpha;    // (-pi, pi]; 0 where Q is 0

    double contraction_sum() const;            // sum_x p_x c_x gammas_x
};

ContractionQuantities contraction_quantities(std::span<const cplx> g, std::span<const cplx> h,
                                             std::span<const double> edge_weights);

} // namespace conetree
