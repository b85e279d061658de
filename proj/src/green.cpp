#include "conetree/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conetree/errors.hpp"
#include "parallel.hpp"

namespace conetree {

namespace {

cplx phi_component(const OperatorParams& p, cplx z, const GreenVector& g, std::size_t j) {
    cplx acc{0.0, 0.0};
    for (std::size_t k = 0; k < g.size(); ++k) acc += p.offdiag[j][k] * g[k];
    const cplx den = z - p.diag[j] + acc;
    if (den == cplx{0.0, 0.0}) throw ValidationError("phi_map: denominator vanished");
    return -1.0 / den;
}

// small dense complex solve, partial pivoting; overwrites a and b
bool gauss_solve(std::vector<cplx>& a, std::vector<cplx>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(a[r * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) return false;
        if (piv != col) {
            for (std::size_t c = col; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        const cplx d = a[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const cplx f = a[r * n + col] / d;
            if (f == cplx{0.0, 0.0}) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t r = n; r-- > 0;) {
        cplx acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r * n + c] * b[c];
        b[r] = acc / a[r * n + r];
    }
    return true;
}

double residual_scale(const OperatorParams& p, cplx z) {
    double m = 0;
    for (std::size_t j = 0; j < p.size(); ++j)
        m = std::max(m, std::abs(p.diag[j]) + p.row_sum(j));
    return 1.0 + std::abs(z) + m;
}

// One damped Newton pass on P(z,.) = 0 from g. Steps that leave the upper
// half plane (when require_h) or fail to reduce the residual are rejected.
// Returns true when the residual reached res_target.
bool newton_polish(const OperatorParams& p, cplx z, GreenVector& g, double res_target,
                   bool require_h, int max_steps = 60) {
    const std::size_t n = g.size();
    std::vector<cplx> jac(n * n), rhs(n);
    double res = max_residual(p, z, g);
    for (int it = 0; it < max_steps; ++it) {
        if (res < res_target) return true;
        for (std::size_t j = 0; j < n; ++j) {
            cplx acc{0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k) acc += p.offdiag[j][k] * g[k];
            const cplx dj = z - p.diag[j] + acc;
            rhs[j] = -(dj * g[j] + 1.0);
            for (std::size_t k = 0; k < n; ++k)
                jac[j * n + k] = p.offdiag[j][k] * g[j] + (j == k ? dj : cplx{0.0, 0.0});
        }
        auto a = jac;
        auto step = rhs;
        if (!gauss_solve(a, step, n)) return res < res_target;
        double lam = 1.0;
        bool accepted = false;
        for (int halves = 0; halves < 40; ++halves) {
            GreenVector cand(n);
            bool ok = true;
            for (std::size_t j = 0; j < n; ++j) {
                cand[j] = g[j] + lam * step[j];
                if (require_h && !(cand[j].imag() > 0)) ok = false;
            }
            if (ok) {
                const double cres = max_residual(p, z, cand);
                if (cres < res) {
                    g = std::move(cand);
                    res = cres;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!accepted) return res < res_target;
    }
    return res < res_target;
}

GreenVector solve_impl(const OperatorParams& p, cplx z, GreenVector g, const SolveOptions& opts) {
    const std::size_t n = p.size();
    if (n == 0) throw ValidationError("solve: empty params");
    for (auto v : g)
        if (!(v.imag() > 0)) throw ValidationError("solve: initial guess not in upper half plane");

    const double res_target = 1e-14 * residual_scale(p, z);
    const bool require_h = z.imag() > 0;
    double step = std::numeric_limits<double>::infinity();

    for (int it = 0; it < opts.max_iter; ++it) {
        GreenVector next(n);
        for (std::size_t j = 0; j < n; ++j) next[j] = phi_component(p, z, g, j);
        step = gamma_max(next, g);
        g = std::move(next);
        if (it >= 4) {
            GreenVector polished = g;
            if (newton_polish(p, z, polished, res_target, require_h)) {
                step = gamma_max(polished, g);
                g = std::move(polished);
                if (step < opts.tol || max_residual(p, z, g) < res_target) return g;
            }
        }
        if (step < opts.tol && max_residual(p, z, g) < 100.0 * opts.tol) return g;
    }
    if (step < opts.tol && max_residual(p, z, g) < 100.0 * opts.tol) return g;
    throw SolveError("solve_fixed_point: no convergence at z=(" + std::to_string(z.real()) + "," +
                         std::to_string(z.imag()) + "), last gamma step " + std::to_string(step),
                     step);
}

} // namespace

GreenVector phi_map(const OperatorParams& p, cplx z, const GreenVector& g) {
    if (g.size() != p.size()) throw ValidationError("phi_map: size mismatch");
    GreenVector out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = phi_component(p, z, g, j);
    return out;
}

std::vector<cplx> polynomial_residual(const OperatorParams& p, cplx z, const GreenVector& g) {
    std::vector<cplx> r(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        cplx acc{0.0, 0.0};
        for (std::size_t k = 0; k < g.size(); ++k) acc += p.offdiag[j][k] * g[k];
        r[j] = (z - p.diag[j] + acc) * g[j] + 1.0;
    }
    return r;
}

double max_residual(const OperatorParams& p, cplx z, const GreenVector& g) {
    double m = 0;
    for (auto v : polynomial_residual(p, z, g)) m = std::max(m, std::abs(v));
    return m;
}

GreenVector solve_fixed_point(const OperatorParams& p, cplx z, const SolveOptions& opts) {
    if (!(z.imag() > 0)) throw ValidationError("solve_fixed_point: requires Im z > 0");
    return solve_impl(p, z, GreenVector(p.size(), cplx{0.0, 1.0}), opts);
}

GreenVector solve_fixed_point_from(const OperatorParams& p, cplx z, GreenVector g0,
                                   const SolveOptions& opts) {
    if (!(z.imag() >= 0)) throw ValidationError("solve_fixed_point_from: requires Im z >= 0");
    return solve_impl(p, z, std::move(g0), opts);
}

bool within_modulus_bounds(const OperatorParams& p, cplx z, const GreenVector& g, double slack) {
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double mjj = p.offdiag[j][j];
        if (!(mjj > 0)) return false;
        double inv_lower = std::abs(z) + std::abs(p.diag[j]);
        for (std::size_t k = 0; k < p.size(); ++k)
            if (p.offdiag[j][k] > 0) inv_lower += p.offdiag[j][k] / std::sqrt(p.offdiag[k][k]);
        const double lower = 1.0 / inv_lower;
        const double upper = 1.0 / std::sqrt(mjj);
        const double a = std::abs(g[j]);
        if (a > upper * (1.0 + slack) || a < lower * (1.0 - slack)) return false;
    }
    return true;
}

BoundaryResult solve_boundary(const OperatorParams& p, double E, double eta_min, double tol,
                              double tau) {
    if (!(eta_min > 0)) throw ValidationError("solve_boundary: eta_min must be positive");
    SolveOptions opts;
    opts.tol = tol;
    double eta = 1.0;
    GreenVector g = solve_fixed_point(p, cplx{E, eta}, opts);
    while (eta > eta_min) {
        eta = std::max(eta / 2.0, eta_min);
        g = solve_fixed_point_from(p, cplx{E, eta}, std::move(g), opts);
    }

    BoundaryResult r;
    r.gamma = g;
    r.eta_reached = eta_min;

    // on-axis polish; keep only a root that stays near the warm start and
    // inside the fixed-point modulus annulus
    GreenVector polished = g;
    const double res_target = 1e-14 * residual_scale(p, cplx{E, 0.0});
    if (newton_polish(p, cplx{E, 0.0}, polished, res_target, false)) {
        double move = 0, scale = 0;
        bool conj_jump = false;
        for (std::size_t j = 0; j < g.size(); ++j) {
            move = std::max(move, std::abs(polished[j] - g[j]));
            scale = std::max(scale, std::abs(g[j]));
            if (polished[j].imag() < -1e-8) conj_jump = true;
        }
        if (!conj_jump && move < 1e-2 * (1.0 + scale) &&
            within_modulus_bounds(p, cplx{E, 0.0}, polished, 1e-6)) {
            r.gamma = std::move(polished);
            r.eta_reached = 0.0;
        }
    }
    double min_im = r.gamma[0].imag();
    for (auto v : r.gamma) min_im = std::min(min_im, v.imag());
    r.real_limit = min_im < tau;
    r.residual = max_residual(p, cplx{E, r.eta_reached}, r.gamma);
    return r;
}

cplx closed_form_regular(double k, double w, cplx z) {
    if (!(k > 0)) throw ValidationError("closed_form_regular: k must be positive");
    const cplx b = z - w;
    const cplx sq = std::sqrt(b * b - 4.0 * k);
    const cplx r1 = (-b + sq) / (2.0 * k);
    const cplx r2 = (-b - sq) / (2.0 * k);
    if (r1.imag() > 0.0 || r2.imag() > 0.0) return r1.imag() > r2.imag() ? r1 : r2;
    return std::abs(r1) <= std::abs(r2) ? r1 : r2;  // boundary, outside the band
}

namespace {

bool point_in_band(const OperatorParams& p, double E, const ScanOptions& o) {
    const BoundaryResult r = solve_boundary(p, E, o.eta_min, o.tol, o.tau);
    double max_im = r.gamma[0].imag();
    for (auto v : r.gamma) max_im = std::max(max_im, v.imag());
    return max_im > o.tau;
}

} // namespace

BandScan scan_bands(const OperatorParams& p, double emin, double emax, int n_points,
                    const ScanOptions& opts) {
    if (n_points < 2 || !(emax > emin)) throw ValidationError("scan_bands: bad grid");
    BandScan scan;
    scan.grid.resize(static_cast<std::size_t>(n_points));
    const double h = (emax - emin) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) scan.grid[static_cast<std::size_t>(i)] = emin + h * i;

    const std::size_t n = scan.grid.size();
    const std::size_t nl = p.size();
    scan.gammas.assign(n, GreenVector(nl, cplx{0.0, 0.0}));
    scan.eta_reached.assign(n, opts.eta_min);
    scan.im_gamma.assign(n, std::vector<double>(nl, 0.0));
    scan.in_band.assign(n, false);
    std::vector<double> residuals(n, 0.0);
    std::vector<char> aligned(n, 0);
    std::vector<char> failed(n, 0);

    detail::parallel_for(static_cast<std::int64_t>(n), opts.threads, [&](std::int64_t i) {
        const auto ii = static_cast<std::size_t>(i);
        try {
            const BoundaryResult r =
                solve_boundary(p, scan.grid[ii], opts.eta_min, opts.tol, opts.tau);
            double max_im = 0;
            for (std::size_t j = 0; j < nl; ++j) {
                scan.im_gamma[ii][j] = r.gamma[j].imag();
                max_im = std::max(max_im, r.gamma[j].imag());
            }
            scan.gammas[ii] = r.gamma;
            scan.eta_reached[ii] = r.eta_reached;
            residuals[ii] = r.residual;
            scan.in_band[ii] = max_im > opts.tau;
            if (scan.in_band[ii]) {
                double worst = 0;
                for (std::size_t a = 0; a < nl; ++a)
                    for (std::size_t b = a + 1; b < nl; ++b)
                        worst = std::max(
                            worst, circle_mod(std::arg(r.gamma[a] * std::conj(r.gamma[b]))));
                aligned[ii] = worst < opts.align_tol ? 1 : 0;
            }
        } catch (const SolveError&) {
            failed[ii] = 1;
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        scan.max_residual = std::max(scan.max_residual, residuals[i]);
        scan.solver_failures += failed[i];
        if (scan.in_band[i] && aligned[i]) scan.sigma0_candidates.push_back(scan.grid[i]);
    }

    // maximal in-band runs; endpoints refined by bisection on the tau crossing
    std::size_t i = 0;
    while (i < n) {
        if (!scan.in_band[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && scan.in_band[j + 1]) ++j;
        double left = scan.grid[i];
        double right = scan.grid[j];
        if (i > 0) {
            double lo = scan.grid[i - 1], hi = scan.grid[i];
            while (hi - lo > opts.edge_refine) {
                const double mid = 0.5 * (lo + hi);
                (point_in_band(p, mid, opts) ? hi : lo) = mid;
            }
            left = 0.5 * (lo + hi);
        }
        if (j + 1 < n) {
            double lo = scan.grid[j], hi = scan.grid[j + 1];
            while (hi - lo > opts.edge_refine) {
                const double mid = 0.5 * (lo + hi);
                (point_in_band(p, mid, opts) ? lo : hi) = mid;
            }
            right = 0.5 * (lo + hi);
        }
        scan.sigma1.emplace_back(left, right);
        i = j + 1;
    }
    return scan;
}

std::vector<cplx> sweep_truncated(const OperatorParams& p, const TruncatedTree& t, cplx z) {
    validate_params(p, t.matrix);
    const std::int64_t n = t.vertex_count();
    std::vector<cplx> g(static_cast<std::size_t>(n));
    for (std::int64_t v = n - 1; v >= 0; --v) {
        const auto vi = static_cast<std::size_t>(v);
        const auto lj = static_cast<std::size_t>(t.label[vi]);
        cplx acc{0.0, 0.0};
        const std::int64_t c0 = t.first_child[vi];
        for (std::int64_t c = 0; c < t.child_count[vi]; ++c) {
            const auto ci = static_cast<std::size_t>(c0 + c);
            const auto lk = static_cast<std::size_t>(t.label[ci]);
            acc += (p.offdiag[lj][lk] / static_cast<double>(t.matrix.entries[lj][lk])) * g[ci];
        }
        const cplx den = z - p.diag[lj] + acc;
        if (den == cplx{0.0, 0.0}) throw ValidationError("sweep_truncated: denominator vanished");
        g[vi] = -1.0 / den;
    }
    return g;
}

std::vector<cplx> extend_to_full(const OperatorParams& p, const TruncatedTree& t,
                                 std::span<const cplx> vertex_gamma) {
    validate_params(p, t.matrix);
    const std::int64_t n = t.vertex_count();
    if (static_cast<std::int64_t>(vertex_gamma.size()) != n)
        throw ValidationError("extend_to_full: per-vertex Green vector size mismatch");
    std::vector<cplx> g(static_cast<std::size_t>(n));
    g[0] = vertex_gamma[0];
    for (std::int64_t v = 1; v < n; ++v) {
        const auto vi = static_cast<std::size_t>(v);
        const auto par = static_cast<std::size_t>(t.parent[vi]);
        const auto lj = static_cast<std::size_t>(t.label[par]);
        const auto lk = static_cast<std::size_t>(t.label[vi]);
        const double tsq = p.offdiag[lj][lk] / static_cast<double>(t.matrix.entries[lj][lk]);
        g[vi] = vertex_gamma[vi] + tsq * vertex_gamma[vi] * vertex_gamma[vi] * g[par];
    }
    return g;
}

std::vector<cplx> extend_to_full_green(const OperatorParams& p, const TruncatedTree& t,
                                       const GreenVector& label_gamma) {
    if (label_gamma.size() != p.size())
        throw ValidationError("extend_to_full_green: label vector size mismatch");
    std::vector<cplx> per_vertex(static_cast<std::size_t>(t.vertex_count()));
    for (std::int64_t v = 0; v < t.vertex_count(); ++v)
        per_vertex[static_cast<std::size_t>(v)] =
            label_gamma[static_cast<std::size_t>(t.label[static_cast<std::size_t>(v)])];
    return extend_to_full(p, t, per_vertex);
}

cplx offdiag_path_product(const TruncatedTree& t, std::span<const cplx> full_g,
                          std::span<const cplx> vertex_gamma, std::int64_t x, std::int64_t y) {
    cplx prod{1.0, 0.0};
    std::int64_t v = y;
    while (v != x) {
        if (v < 0) throw ValidationError("offdiag_path_product: y is not a descendant of x");
        prod *= vertex_gamma[static_cast<std::size_t>(v)];
        v = t.parent[static_cast<std::size_t>(v)];
    }
    return full_g[static_cast<std::size_t>(x)] * prod;
}

std::vector<GreenVector> solve_grid(const OperatorParams& p, std::span<const double> e_grid,
                                    double eta, int threads) {
    if (!(eta > 0)) throw ValidationError("solve_grid: eta must be positive");
    std::vector<GreenVector> out(e_grid.size());
    detail::parallel_for(static_cast<std::int64_t>(e_grid.size()), threads, [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] =
            solve_fixed_point(p, cplx{e_grid[static_cast<std::size_t>(i)], eta});
    });
    return out;
}

std::vector<double> density(const OperatorParams& p, std::span<const double> e_grid, double eta,
                            int threads, int root_label) {
    if (root_label < 0 || static_cast<std::size_t>(root_label) >= p.size())
        throw ValidationError("density: root label out of range");
    const auto gammas = solve_grid(p, e_grid, eta, threads);
    constexpr double inv_pi = 0.31830988618379067154;
    std::vector<double> rho(e_grid.size(), 0.0);
    for (std::size_t i = 0; i < e_grid.size(); ++i)
        rho[i] = inv_pi * gammas[i][static_cast<std::size_t>(root_label)].imag();
    return rho;
}

double lp_diagnostic(const OperatorParams& p, double a, double b, double p_exp, double eta,
                     int n_points) {
    if (!(p_exp > 1)) throw ValidationError("lp_diagnostic: exponent must exceed 1");
    if (n_points < 2 || !(b > a)) throw ValidationError("lp_diagnostic: bad interval");
    const double h = (b - a) / (n_points - 1);
    double acc = 0;
    for (int i = 0; i < n_points; ++i) {
        const auto g = solve_fixed_point(p, cplx{a + h * i, eta});
        const double v = std::pow(std::abs(g[0]), p_exp);
        acc += (i == 0 || i == n_points - 1) ? 0.5 * v : v;
    }
    return acc * h;
}

} // namespace conetree
