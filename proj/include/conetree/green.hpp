#pragma once

#include <complex>
#include <span>
#include <vector>

#include "conetree/hyperbolic.hpp"
#include "conetree/operators.hpp"
#include "conetree/tree.hpp"

namespace conetree {

/// Reduced truncated Green function: one component per label, all in the
/// upper half plane while Im z > 0.
using GreenVector = std::vector<cplx>;

struct SolveOptions {
    double tol = 1e-10;   // gamma_max step stopping threshold
    int max_iter = 2000;  // combined Picard + Newton budget
};

/// One application of the reduced recursion map:
/// Phi_j(g) = -1 / (z - m_j + sum_k m_{j,k} g_k).
GreenVector phi_map(const OperatorParams& p, cplx z, const GreenVector& g);

/// Residual of the fixed-point polynomial system,
/// P_j(z,g) = (z - m_j + sum_k m_{j,k} g_k) g_j + 1.
std::vector<cplx> polynomial_residual(const OperatorParams& p, cplx z, const GreenVector& g);
double max_residual(const OperatorParams& p, cplx z, const GreenVector& g);

/// Unique fixed point of phi_map in H^A for Im z > 0. Picard from i*1 with a
/// guarded Newton polish; the result satisfies the two-sided modulus bounds
/// and max residual < 100*tol, else SolveError (carrying the last gamma step).
GreenVector solve_fixed_point(const OperatorParams& p, cplx z, const SolveOptions& opts = {});

/// Same, warm-started from g0 (g0 must lie in H^A).
GreenVector solve_fixed_point_from(const OperatorParams& p, cplx z, GreenVector g0,
                                   const SolveOptions& opts = {});

struct BoundaryResult {
    GreenVector gamma;
    double eta_reached = 0;   // 0 when the on-axis polish was accepted
    bool real_limit = false;  // min_j Im Gamma_j below the band threshold
    double residual = 0;      // max |P_j| at (E + i*eta_reached)
};

/// Boundary values by eta-continuation: solve at eta = 1, halve with warm
/// starts down to eta_min, then attempt a final polish at eta = 0 (kept only
/// if it converges, respects the modulus bounds and stays gamma-close to the
/// warm start).
BoundaryResult solve_boundary(const OperatorParams& p, double E, double eta_min = 1e-7,
                              double tol = 1e-10, double tau = 1e-4);

/// Green function of a regular tree operator (constant row sum k, constant
/// diagonal w): the root of k*zeta^2 + (z-w)*zeta + 1 = 0 with Im zeta > 0 for
/// Im z > 0; boundary values by continuity (the smaller-modulus real root
/// outside the band).
cplx closed_form_regular(double k, double w, cplx z);

struct BandScan {
    std::vector<double> grid;
    std::vector<GreenVector> gammas;                  // boundary values per grid point
    std::vector<double> eta_reached;                  // 0 where the on-axis polish held
    std::vector<std::vector<double>> im_gamma;        // per grid point, per label
    std::vector<std::pair<double, double>> sigma1;    // disjoint, sorted, bisection-refined
    std::vector<double> sigma0_candidates;            // grid points with aligned components
    std::vector<bool> in_band;                        // per grid point
    double max_residual = 0;
    int solver_failures = 0;
};

struct ScanOptions {
    double eta_min = 1e-7;
    double tol = 1e-10;
    double tau = 1e-4;         // band threshold on max_j Im Gamma_j
    double align_tol = 1e-3;   // radians, Sigma0 component-alignment test
    double edge_refine = 1e-6; // bisection resolution for interval endpoints
    int threads = 1;
};

BandScan scan_bands(const OperatorParams& p, double emin, double emax, int n_points,
                    const ScanOptions& opts = {});

/// Per-vertex truncated Green function of the operator restricted to the
/// finite tree (free boundary): one upward sweep, leaves get -1/(z - w).
std::vector<cplx> sweep_truncated(const OperatorParams& p, const TruncatedTree& t, cplx z);

/// Extend per-vertex truncated values downward to full diagonal Green values:
/// G_root = Gamma_root, then G_child = Gamma_child + |t|^2 Gamma_child^2 G_parent.
std::vector<cplx> extend_to_full(const OperatorParams& p, const TruncatedTree& t,
                                 std::span<const cplx> vertex_gamma);

/// Infinite-tree flavor: per-vertex Gamma_x = Gamma_{a(x)} from the solved
/// label vector, then the same downward extension.
std::vector<cplx> extend_to_full_green(const OperatorParams& p, const TruncatedTree& t,
                                       const GreenVector& label_gamma);

/// Off-diagonal entry via the path product G_{x,y} = G_x * prod Gamma_{x_j}
/// over the path strictly below x down to y (y a descendant of x, or y == x).
cplx offdiag_path_product(const TruncatedTree& t, std::span<const cplx> full_g,
                          std::span<const cplx> vertex_gamma, std::int64_t x, std::int64_t y);

/// Fixed points across a grid of energies at one eta (independent per point).
std::vector<GreenVector> solve_grid(const OperatorParams& p, std::span<const double> e_grid,
                                    double eta, int threads = 1);

/// Spectral density pi^{-1} Im G_root(E + i*eta) on a grid (eta > 0); the
/// root label selects which component is the root Green function.
std::vector<double> density(const OperatorParams& p, std::span<const double> e_grid, double eta,
                            int threads = 1, int root_label = 0);

/// Trapezoid integral of |G_root(E + i*eta)|^p over [a,b]; bounded values as
/// eta decreases indicate absence of singular spectrum on the interval.
double lp_diagnostic(const OperatorParams& p, double a, double b, double p_exp, double eta,
                     int n_points = 2001);

/// Two-sided modulus bounds for fixed points,
/// 1/(|z| + m_j + sum_k m_{j,k}/sqrt(m_{j,j})) <= |g_j| <= 1/sqrt(m_{j,j}).
bool within_modulus_bounds(const OperatorParams& p, cplx z, const GreenVector& g,
                           double slack = 1e-9);

} // namespace conetree
