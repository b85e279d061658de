#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conetree/green.hpp"

namespace conetree {

struct DistributionSpec {
    enum class Kind { Uniform, TwoPoint, Constant };
    Kind kind = Kind::Uniform;
    double a = -1.0, b = 1.0;  // two-point support
    double prob_a = 0.5;       // P(value = a)
    double value = 0.0;        // constant

    // map one uniform u in [0,1) to a draw in [-1,1]
    double sample(double u) const;
};

/// Random diagonal potential: independent per-vertex draws, identically
/// distributed per label, scaled by the coupling lam.
struct PotentialSpec {
    std::vector<DistributionSpec> per_label;  // size 1 = shared by all labels
    double lambda = 0.0;
    std::uint64_t seed = 0;

    const DistributionSpec& dist(int label) const {
        return per_label.size() == 1 ? per_label[0] : per_label[static_cast<std::size_t>(label)];
    }
};

/// Random multiplicative edge weights theta_e = 1 + lam * v_child on the edge
/// into each vertex; requires lam < 1 so that theta > 0.
struct EdgeWeightSpec {
    std::vector<DistributionSpec> per_label;
    double lambda = 0.0;
    std::uint64_t seed = 0;

    const DistributionSpec& dist(int label) const {
        return per_label.size() == 1 ? per_label[0] : per_label[static_cast<std::size_t>(label)];
    }
};

/// One sample of the perturbed truncated Green function at the tree root:
/// leaves seeded with the unperturbed fixed point, one upward sweep of
/// -1/G = z - m_j - lam*v_x + sum |t|^2 G_child   (diagonal case) or
/// -1/G = z - m_j + sum theta^2 |t|^2 G_child     (edge-weight case).
/// Deterministic in (spec.seed, sample_index, vertex id).
cplx sample_green(const OperatorParams& p, const TruncatedTree& t, const PotentialSpec& spec,
                  cplx z, std::uint64_t sample_index);
cplx sample_green(const OperatorParams& p, const TruncatedTree& t, const EdgeWeightSpec& spec,
                  cplx z, std::uint64_t sample_index);

/// Full per-vertex sweep of one sample (index 0 = root). Same-label vertices
/// with disjoint forward trees give independent, identically distributed
/// values here.
std::vector<cplx> sample_green_all(const OperatorParams& p, const TruncatedTree& t,
                                   const PotentialSpec& spec, cplx z, std::uint64_t sample_index);

/// gamma gap at the root between a fixed-point-seeded and an i*1-seeded sweep
/// (worst over the given sample); the depth-sufficiency guard.
double seed_sensitivity(const OperatorParams& p, const TruncatedTree& t, const PotentialSpec& spec,
                        cplx z, std::uint64_t sample_index);

struct DeviationStats {
    int label = 0;
    double p_exp = 2.0;
    double lambda = 0.0;
    std::uint64_t n = 0;
    double mean = 0.0;       // sample mean of gamma(Gamma^w, Gamma^0)^p
    double sd = 0.0;         // sample standard deviation
    double half_width3 = 0.0;  // 3*sd/sqrt(n)
    double mean_abs_g_p = 0.0; // sample mean of |Gamma^w|^p
    double seed_gap = 0.0;
};

/// Monte Carlo estimate of E[gamma(Gamma^w, Gamma^0)^p] at the root of t.
/// The reference Gamma^0 is the lam = 0 sweep on the same tree, so lam = 0
/// yields exactly zero. Throws SolveError when the dual-seed guard exceeds
/// seed_tol. Deterministic for fixed seed regardless of threads.
DeviationStats estimate_deviation(const OperatorParams& p, const TruncatedTree& t,
                                  const PotentialSpec& spec, cplx z, double p_exp,
                                  std::uint64_t n_samples, int threads = 1,
                                  double seed_tol = 1e-6);

/// Sphere pair around a vertex o and a same-label forward neighbor o':
/// positions 0..n_up-1 are the upper sphere S_{o'}, the rest the lower sphere
/// S_o minus o'. h is the solved Green vector at z spread over the positions.
struct TwoSphereContext {
    int root_label = 0;
    std::size_t n_up = 0;
    std::vector<int> pos_label;      // per position
    std::vector<double> weight;      // |t|^2 per position (parent side)
    std::vector<cplx> h;             // reference values Gamma_{a(x)}(z,T)
    GreenVector label_gamma;         // solved fixed point per label
    cplx z;
    double eps0 = 0;                 // min Im h
    double pi_size = 0;              // |Pi| = prod (label multiplicity)!, may overflow to inf
    double m_diag_root = 0;          // m_j of the root label
    double w_root_edge = 0;          // |t|^2 of the o -> o' edge, m_{j,j}/M_{j,j}

    std::size_t n_positions() const { return pos_label.size(); }
};

/// Requires M1 (so o' exists) and builds the context at z (Im z > 0 solves the
/// fixed point; Im z == 0 uses boundary continuation).
TwoSphereContext build_two_sphere_context(const OperatorParams& p, const SubstitutionMatrix& m,
                                          int root_label, cplx z);

struct ZPair {
    double z0 = 0;
    double z1 = 0;
    cplx g_upper;  // Psi_{z-v,o'} applied to the upper-sphere restriction of g
};

/// Two-step contraction sum Z0 and its Jensen majorant Z1^(p) for a vector g
/// over the sphere pair; |Z0|^p <= Z1 <= gamma_max(g,h)^p always.
ZPair z0_z1(const TwoSphereContext& ctx, cplx z, double v, std::span<const cplx> g, double p_exp);

/// One more recursion step: the value at o fed by (g_upper, lower part of g).
cplx two_step_value(const TwoSphereContext& ctx, cplx z, double v_o, cplx g_upper,
                    std::span<const cplx> g);

struct KappaOptions {
    std::uint64_t perm_cap = 20000;   // enumerate |Pi| up to this, sample beyond
    std::uint64_t n_perm_samples = 4096;
    std::uint64_t seed = 0;
};

/// Averaged contraction coefficient kappa = sum_pi |Z0(g o pi)|^p / sum_pi Z1(g o pi),
/// in [0,1]. Exact over Pi when |Pi| <= perm_cap, otherwise an unbiased
/// ratio over uniformly sampled label-invariant permutations. Throws
/// ValidationError when g == h (all-zero denominator).
double kappa(const TwoSphereContext& ctx, cplx z, double v, std::span<const cplx> g, double p_exp,
             const KappaOptions& opts = {});

struct KappaSurvey {
    double max_kappa = 0;
    double q50 = 0, q90 = 0, q99 = 0;
    double delta_hat = 0;  // 1 - max_kappa
    std::uint64_t n = 0;
    std::uint64_t n_perms_used = 0;
    bool exact_perms = true;
};

/// Samples g uniformly on gamma-spheres with radius in [R, 10R] around h and
/// v uniform in [-lam, lam]; reports the empirical contraction margin.
KappaSurvey kappa_survey(const TwoSphereContext& ctx, cplx z, double lam, double R,
                         std::uint64_t n_samples, double p_exp, std::uint64_t seed = 1,
                         int threads = 1, const KappaOptions& opts = {});

/// Uniform point on the gamma_max-sphere of the given radius around h
/// (Euclidean disc directions, radial rescale). Deterministic in (seed, index).
std::vector<cplx> sample_on_gamma_sphere(std::span<const cplx> h, double radius,
                                         std::uint64_t seed, std::uint64_t index);

} // namespace conetree
