#include "conetree/random_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "conetree/errors.hpp"
#include "conetree/rng.hpp"
#include "parallel.hpp"

namespace conetree {

double DistributionSpec::sample(double u) const {
    switch (kind) {
        case Kind::Uniform: return 2.0 * u - 1.0;
        case Kind::TwoPoint: return u < prob_a ? a : b;
        case Kind::Constant: return value;
    }
    return 0.0;
}

namespace {

void validate_spec_values(const std::vector<DistributionSpec>& per_label, std::size_t n_labels,
                          double lambda) {
    if (per_label.size() != 1 && per_label.size() != n_labels)
        throw ValidationError("random spec: need one distribution or one per label");
    if (!(lambda >= 0) || !std::isfinite(lambda))
        throw ValidationError("random spec: coupling must be a finite nonnegative number");
    for (const auto& d : per_label) {
        if (std::abs(d.a) > 1 || std::abs(d.b) > 1 || std::abs(d.value) > 1)
            throw ValidationError("random spec: support must lie in [-1,1]");
        if (d.prob_a < 0 || d.prob_a > 1) throw ValidationError("random spec: bad two-point weight");
    }
}

// Upward sweep with per-vertex draws. Vertices at the cut depth take the seed
// per label; everything above applies one recursion step.
template <typename Spec>
std::vector<cplx> sweep_sample_all(const OperatorParams& p, const TruncatedTree& t,
                                   const Spec& spec, cplx z, std::uint64_t sample_index,
                                   std::span<const cplx> seed_vals, bool offdiagonal) {
    const std::int64_t n = t.vertex_count();
    std::vector<cplx> g(static_cast<std::size_t>(n));
    const std::int64_t deepest = t.sphere_start[static_cast<std::size_t>(t.depth_limit)];
    for (std::int64_t v = n - 1; v >= 0; --v) {
        const auto vi = static_cast<std::size_t>(v);
        const auto lj = static_cast<std::size_t>(t.label[vi]);
        if (v >= deepest && t.depth_limit > 0) {
            g[vi] = seed_vals[lj];
            continue;
        }
        cplx acc{0.0, 0.0};
        const std::int64_t c0 = t.first_child[vi];
        for (std::int64_t c = 0; c < t.child_count[vi]; ++c) {
            const auto ci = static_cast<std::size_t>(c0 + c);
            const auto lk = static_cast<std::size_t>(t.label[ci]);
            const double tsq = p.offdiag[lj][lk] / static_cast<double>(t.matrix.entries[lj][lk]);
            if (offdiagonal) {
                const double u = uniform01(spec.seed, static_cast<std::uint64_t>(c0 + c) + 1,
                                           sample_index);
                const double theta = 1.0 + spec.lambda * spec.dist(t.label[ci]).sample(u);
                acc += theta * theta * tsq * g[ci];
            } else {
                acc += tsq * g[ci];
            }
        }
        cplx den = z - p.diag[lj] + acc;
        if (!offdiagonal) {
            const double u = uniform01(spec.seed, static_cast<std::uint64_t>(v) + 1, sample_index);
            den -= spec.lambda * spec.dist(static_cast<int>(lj)).sample(u);
        }
        if (den == cplx{0.0, 0.0}) throw ValidationError("sample_green: denominator vanished");
        g[vi] = -1.0 / den;
    }
    return g;
}

template <typename Spec>
cplx sweep_sample(const OperatorParams& p, const TruncatedTree& t, const Spec& spec, cplx z,
                  std::uint64_t sample_index, std::span<const cplx> seed_vals, bool offdiagonal) {
    return sweep_sample_all(p, t, spec, z, sample_index, seed_vals, offdiagonal)[0];
}

} // namespace

cplx sample_green(const OperatorParams& p, const TruncatedTree& t, const PotentialSpec& spec,
                  cplx z, std::uint64_t sample_index) {
    if (!(z.imag() > 0)) throw ValidationError("sample_green: requires Im z > 0");
    validate_params(p, t.matrix);
    validate_spec_values(spec.per_label, p.size(), spec.lambda);
    const GreenVector seed = solve_fixed_point(p, z);
    return sweep_sample(p, t, spec, z, sample_index, seed, false);
}

cplx sample_green(const OperatorParams& p, const TruncatedTree& t, const EdgeWeightSpec& spec,
                  cplx z, std::uint64_t sample_index) {
    if (!(z.imag() > 0)) throw ValidationError("sample_green: requires Im z > 0");
    if (!(spec.lambda < 1.0))
        throw ValidationError("sample_green: edge-weight coupling must stay below 1");
    validate_params(p, t.matrix);
    validate_spec_values(spec.per_label, p.size(), spec.lambda);
    const GreenVector seed = solve_fixed_point(p, z);
    return sweep_sample(p, t, spec, z, sample_index, seed, true);
}

std::vector<cplx> sample_green_all(const OperatorParams& p, const TruncatedTree& t,
                                   const PotentialSpec& spec, cplx z,
                                   std::uint64_t sample_index) {
    if (!(z.imag() > 0)) throw ValidationError("sample_green: requires Im z > 0");
    validate_params(p, t.matrix);
    validate_spec_values(spec.per_label, p.size(), spec.lambda);
    const GreenVector seed = solve_fixed_point(p, z);
    return sweep_sample_all(p, t, spec, z, sample_index, seed, false);
}

double seed_sensitivity(const OperatorParams& p, const TruncatedTree& t, const PotentialSpec& spec,
                        cplx z, std::uint64_t sample_index) {
    const GreenVector seed = solve_fixed_point(p, z);
    const GreenVector alt(p.size(), cplx{0.0, 1.0});
    const cplx a = sweep_sample(p, t, spec, z, sample_index, seed, false);
    const cplx b = sweep_sample(p, t, spec, z, sample_index, alt, false);
    return gamma_semi(a, b);
}

DeviationStats estimate_deviation(const OperatorParams& p, const TruncatedTree& t,
                                  const PotentialSpec& spec, cplx z, double p_exp,
                                  std::uint64_t n_samples, int threads, double seed_tol) {
    if (!(p_exp > 1)) throw ValidationError("estimate_deviation: exponent must exceed 1");
    if (!(z.imag() > 0)) throw ValidationError("estimate_deviation: requires Im z > 0");
    validate_params(p, t.matrix);
    validate_spec_values(spec.per_label, p.size(), spec.lambda);

    DeviationStats stats;
    stats.label = t.root_label;
    stats.p_exp = p_exp;
    stats.lambda = spec.lambda;
    stats.n = n_samples;

    stats.seed_gap = seed_sensitivity(p, t, spec, z, 0);
    if (stats.seed_gap > seed_tol)
        throw SolveError("estimate_deviation: tree depth insufficient, dual-seed gap " +
                             std::to_string(stats.seed_gap),
                         stats.seed_gap);

    const GreenVector seed = solve_fixed_point(p, z);
    PotentialSpec zero = spec;
    zero.lambda = 0.0;
    const cplx reference = sweep_sample(p, t, zero, z, 0, seed, false);

    std::vector<double> vals(n_samples), absg(n_samples);
    detail::parallel_for(static_cast<std::int64_t>(n_samples), threads, [&](std::int64_t s) {
        const cplx gs =
            sweep_sample(p, t, spec, z, static_cast<std::uint64_t>(s), seed, false);
        vals[static_cast<std::size_t>(s)] = std::pow(gamma_semi(gs, reference), p_exp);
        absg[static_cast<std::size_t>(s)] = std::pow(std::abs(gs), p_exp);
    });

    double sum = 0, sum_g = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        sum += vals[s];
        sum_g += absg[s];
    }
    stats.mean = sum / static_cast<double>(n_samples);
    stats.mean_abs_g_p = sum_g / static_cast<double>(n_samples);
    double var = 0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double d = vals[s] - stats.mean;
        var += d * d;
    }
    stats.sd = n_samples > 1 ? std::sqrt(var / static_cast<double>(n_samples - 1)) : 0.0;
    stats.half_width3 = 3.0 * stats.sd / std::sqrt(static_cast<double>(n_samples));
    return stats;
}

TwoSphereContext build_two_sphere_context(const OperatorParams& p, const SubstitutionMatrix& m,
                                          int root_label, cplx z) {
    validate_params(p, m);
    const std::size_t N = m.size();
    if (root_label < 0 || static_cast<std::size_t>(root_label) >= N)
        throw ValidationError("two_sphere_context: root label out of range");
    const auto j = static_cast<std::size_t>(root_label);
    if (m.entries[j][j] < 1)
        throw ValidationError("two_sphere_context: requires M1 (a same-label forward neighbor)");

    TwoSphereContext ctx;
    ctx.root_label = root_label;
    ctx.z = z;
    ctx.m_diag_root = p.diag[j];
    ctx.label_gamma = z.imag() > 0 ? solve_fixed_point(p, z)
                                   : solve_boundary(p, z.real()).gamma;

    auto push_sphere = [&](bool drop_one_root) {
        for (std::size_t k = 0; k < N; ++k) {
            std::int64_t cnt = m.entries[j][k];
            if (drop_one_root && k == j) cnt -= 1;
            for (std::int64_t c = 0; c < cnt; ++c) {
                ctx.pos_label.push_back(static_cast<int>(k));
                ctx.weight.push_back(p.offdiag[j][k] / static_cast<double>(m.entries[j][k]));
                ctx.h.push_back(ctx.label_gamma[k]);
            }
        }
    };
    push_sphere(false);  // upper sphere S_{o'}
    ctx.n_up = ctx.pos_label.size();
    push_sphere(true);   // lower sphere S_o minus o'

    ctx.eps0 = ctx.h.empty() ? 0.0 : ctx.h[0].imag();
    for (auto v : ctx.h) ctx.eps0 = std::min(ctx.eps0, v.imag());

    ctx.pi_size = 1.0;
    for (std::size_t k = 0; k < N; ++k) {
        const std::int64_t cnt = 2 * m.entries[j][k] - (k == j ? 1 : 0);
        for (std::int64_t c = 2; c <= cnt; ++c) ctx.pi_size *= static_cast<double>(c);
    }
    ctx.w_root_edge = p.offdiag[j][j] / static_cast<double>(m.entries[j][j]);
    return ctx;
}

namespace {

cplx psi_upper(const TwoSphereContext& ctx, cplx z, double v, std::span<const cplx> g) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < ctx.n_up; ++i) acc += ctx.weight[i] * g[i];
    const cplx den = z - v - ctx.m_diag_root + acc;
    if (den == cplx{0.0, 0.0}) throw ValidationError("z0_z1: denominator vanished");
    return -1.0 / den;
}

} // namespace

ZPair z0_z1(const TwoSphereContext& ctx, cplx z, double v, std::span<const cplx> g, double p_exp) {
    const std::size_t n = ctx.n_positions();
    if (g.size() != n) throw ValidationError("z0_z1: vector size mismatch");
    for (auto x : g)
        if (!(x.imag() > 0)) throw ValidationError("z0_z1: input not in upper half plane");

    ZPair out;
    out.g_upper = psi_upper(ctx, z, v, g);
    const cplx h_upper = ctx.label_gamma[static_cast<std::size_t>(ctx.root_label)];

    const auto up = ctx.n_up;
    const auto q_up = contraction_quantities(g.subspan(0, up), std::span(ctx.h).subspan(0, up),
                                             std::span(ctx.weight).subspan(0, up));

    const std::size_t n_lo = n - up;
    std::vector<cplx> g_so(n_lo + 1), h_so(n_lo + 1);
    std::vector<double> w_so(n_lo + 1);
    g_so[0] = out.g_upper;
    h_so[0] = h_upper;
    w_so[0] = ctx.w_root_edge;
    for (std::size_t i = 0; i < n_lo; ++i) {
        g_so[i + 1] = g[up + i];
        h_so[i + 1] = ctx.h[up + i];
        w_so[i + 1] = ctx.weight[up + i];
    }
    const auto q_so = contraction_quantities(g_so, h_so, w_so);

    double z0 = 0, z1 = 0, up_sum0 = 0, up_sum1 = 0;
    for (std::size_t i = 0; i < up; ++i) {
        up_sum0 += q_up.p[i] * q_up.c[i] * q_up.gammas[i];
        up_sum1 += q_up.p[i] * std::pow(q_up.gammas[i], p_exp);
    }
    z0 = q_so.p[0] * q_so.c[0] * up_sum0;
    z1 = q_so.p[0] * up_sum1;
    for (std::size_t i = 0; i < n_lo; ++i) {
        z0 += q_so.p[i + 1] * q_so.c[i + 1] * q_so.gammas[i + 1];
        z1 += q_so.p[i + 1] * std::pow(q_so.gammas[i + 1], p_exp);
    }
    out.z0 = z0;
    out.z1 = z1;
    if (std::pow(std::abs(z0), p_exp) > z1 * (1.0 + 1e-9) + 1e-300)
        throw std::logic_error("z0_z1: Jensen majorant violated (internal bug)");
    return out;
}

cplx two_step_value(const TwoSphereContext& ctx, cplx z, double v_o, cplx g_upper,
                    std::span<const cplx> g) {
    cplx acc = ctx.w_root_edge * g_upper;
    for (std::size_t i = ctx.n_up; i < ctx.n_positions(); ++i) acc += ctx.weight[i] * g[i];
    const cplx den = z - v_o - ctx.m_diag_root + acc;
    if (den == cplx{0.0, 0.0}) throw ValidationError("two_step_value: denominator vanished");
    return -1.0 / den;
}

namespace {

std::vector<std::vector<std::size_t>> label_classes(const TwoSphereContext& ctx) {
    std::size_t max_label = 0;
    for (int l : ctx.pos_label) max_label = std::max(max_label, static_cast<std::size_t>(l));
    std::vector<std::vector<std::size_t>> classes(max_label + 1);
    for (std::size_t i = 0; i < ctx.n_positions(); ++i)
        classes[static_cast<std::size_t>(ctx.pos_label[i])].push_back(i);
    return classes;
}

// apply per-class orderings: perm[i] = source position feeding slot i
std::vector<cplx> apply_perm(std::span<const cplx> g, const std::vector<std::size_t>& perm) {
    std::vector<cplx> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[perm[i]];
    return out;
}

} // namespace

double kappa(const TwoSphereContext& ctx, cplx z, double v, std::span<const cplx> g, double p_exp,
             const KappaOptions& opts) {
    if (gamma_max(g, ctx.h) == 0.0)
        throw ValidationError("kappa: g equals the reference vector (zero denominator)");

    const auto classes = label_classes(ctx);
    double num = 0, den = 0;
    auto accumulate = [&](const std::vector<std::size_t>& perm) {
        const auto gp = apply_perm(g, perm);
        const ZPair zp = z0_z1(ctx, z, v, gp, p_exp);
        num += std::pow(std::abs(zp.z0), p_exp);
        den += zp.z1;
    };

    if (ctx.pi_size <= static_cast<double>(opts.perm_cap)) {
        // exact enumeration: odometer over per-class permutations
        std::vector<std::vector<std::size_t>> orderings;  // flattened per class
        std::vector<std::size_t> counts;
        for (const auto& cls : classes) {
            if (cls.size() < 2) continue;
            std::vector<std::size_t> base = cls;
            std::vector<std::size_t> all;
            std::size_t cnt = 0;
            std::sort(base.begin(), base.end());
            do {
                all.insert(all.end(), base.begin(), base.end());
                ++cnt;
            } while (std::next_permutation(base.begin(), base.end()));
            orderings.push_back(std::move(all));
            counts.push_back(cnt);
        }
        std::vector<std::size_t> perm(ctx.n_positions());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::vector<std::size_t> odo(counts.size(), 0);
        while (true) {
            std::size_t ci = 0;
            for (std::size_t c = 0; c < classes.size(); ++c) {
                if (classes[c].size() < 2) continue;
                const auto& cls = classes[c];
                const auto* ord = &orderings[ci][odo[ci] * cls.size()];
                for (std::size_t i = 0; i < cls.size(); ++i) perm[cls[i]] = ord[i];
                ++ci;
            }
            accumulate(perm);
            std::size_t d = 0;
            for (; d < odo.size(); ++d) {
                if (++odo[d] < counts[d]) break;
                odo[d] = 0;
            }
            if (d == odo.size()) break;
        }
    } else {
        // uniform sampling of label-invariant permutations; same sample for
        // numerator and denominator keeps the ratio estimator consistent
        std::vector<std::size_t> perm(ctx.n_positions());
        for (std::uint64_t s = 0; s < opts.n_perm_samples; ++s) {
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::uint64_t ctr = 0;
            for (const auto& cls : classes) {
                if (cls.size() < 2) continue;
                for (std::size_t i = cls.size() - 1; i > 0; --i) {
                    const double u = uniform01(opts.seed, s + 1, ++ctr);
                    const auto pick = static_cast<std::size_t>(u * static_cast<double>(i + 1));
                    std::swap(perm[cls[i]], perm[cls[std::min(pick, i)]]);
                }
            }
            accumulate(perm);
        }
    }
    if (den == 0.0) throw ValidationError("kappa: zero denominator");
    return num / den;
}

std::vector<cplx> sample_on_gamma_sphere(std::span<const cplx> h, double radius,
                                         std::uint64_t seed, std::uint64_t index) {
    const std::size_t n = h.size();
    std::vector<cplx> dir(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t ctr = 0;
        for (;;) {
            const std::uint64_t stream = mix64(index * 2654435761ull + i);
            const double x = 2.0 * uniform01(seed, stream, 2 * ctr) - 1.0;
            const double y = 2.0 * uniform01(seed, stream, 2 * ctr + 1) - 1.0;
            ++ctr;
            if (x * x + y * y <= 1.0 && (x != 0.0 || y != 0.0)) {
                dir[i] = cplx{x, y};
                break;
            }
            if (ctr > 128) throw std::logic_error("sample_on_gamma_sphere: rejection stalled");
        }
    }
    auto gm_at = [&](double s) {
        double m = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx gi = h[i] + s * dir[i];
            if (!(gi.imag() > 0)) return std::numeric_limits<double>::infinity();
            m = std::max(m, gamma_semi(gi, h[i]));
        }
        return m;
    };
    double hi = 1.0;
    while (gm_at(hi) < radius) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gm_at(mid) < radius ? lo : hi) = mid;
    }
    const double s = 0.5 * (lo + hi);
    std::vector<cplx> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = h[i] + s * dir[i];
    for (auto& gi : g)
        if (!(gi.imag() > 0)) gi = cplx{gi.real(), 1e-300};
    return g;
}

KappaSurvey kappa_survey(const TwoSphereContext& ctx, cplx z, double lam, double R,
                         std::uint64_t n_samples, double p_exp, std::uint64_t seed, int threads,
                         const KappaOptions& opts) {
    if (!(R > 0)) throw ValidationError("kappa_survey: R must be positive");
    KappaSurvey out;
    out.n = n_samples;
    out.exact_perms = ctx.pi_size <= static_cast<double>(opts.perm_cap);
    out.n_perms_used = out.exact_perms ? static_cast<std::uint64_t>(ctx.pi_size)
                                       : opts.n_perm_samples;

    std::vector<double> ks(n_samples);
    detail::parallel_for(static_cast<std::int64_t>(n_samples), threads, [&](std::int64_t i) {
        const auto s = static_cast<std::uint64_t>(i);
        const double radius = R * (1.0 + 9.0 * uniform01(seed, 1, s));
        const double v = lam * uniform_pm1(seed, 2, s);
        const auto g = sample_on_gamma_sphere(ctx.h, radius, seed ^ 0x5bd1e995u, s);
        KappaOptions ko = opts;
        ko.seed = mix64(seed + s);
        ks[static_cast<std::size_t>(i)] = kappa(ctx, z, v, g, p_exp, ko);
    });
    std::vector<double> sorted = ks;
    std::sort(sorted.begin(), sorted.end());
    auto q = [&](double f) {
        const auto idx = static_cast<std::size_t>(f * static_cast<double>(sorted.size() - 1));
        return sorted[idx];
    };
    out.q50 = q(0.50);
    out.q90 = q(0.90);
    out.q99 = q(0.99);
    out.max_kappa = sorted.back();
    out.delta_hat = 1.0 - out.max_kappa;
    return out;
}

} // namespace conetree
