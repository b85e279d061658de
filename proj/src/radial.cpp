#include "conetree/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "conetree/errors.hpp"

namespace conetree {

RadialPotential make_constant_potential(std::size_t n_labels, int horizon, double value) {
    RadialPotential v;
    v.horizon = horizon;
    v.n_labels = n_labels;
    v.fallback = value;
    v.values.assign(static_cast<std::size_t>(horizon) + 1, std::vector<double>(n_labels, value));
    return v;
}

void validate_potential(const RadialPotential& v) {
    if (std::abs(v.fallback) > 1.0)
        throw ValidationError("radial potential: default value outside [-1,1]");
    for (const auto& layer : v.values)
        for (double x : layer)
            if (!std::isfinite(x) || std::abs(x) > 1.0)
                throw ValidationError("radial potential: value outside [-1,1]");
}

GreenVector psi_layer(const OperatorParams& p, cplx z, double lam,
                      std::span<const double> v_layer, const GreenVector& g) {
    const std::size_t n = p.size();
    if (g.size() != n || v_layer.size() != n) throw ValidationError("psi_layer: size mismatch");
    GreenVector out(n);
    for (std::size_t j = 0; j < n; ++j) {
        cplx acc{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) acc += p.offdiag[j][k] * g[k];
        const cplx den = z - p.diag[j] - lam * v_layer[j] + acc;
        if (den == cplx{0.0, 0.0}) throw ValidationError("psi_layer: denominator vanished");
        out[j] = -1.0 / den;
    }
    return out;
}

namespace {

// backward sweep from a horizon seed to layer 0; returns all layers
std::vector<GreenVector> backward_layers(const OperatorParams& p, cplx z, double lam,
                                         const RadialPotential& v, int n_layers,
                                         const GreenVector& seed) {
    std::vector<GreenVector> layers(static_cast<std::size_t>(n_layers) + 1);
    layers[static_cast<std::size_t>(n_layers)] = seed;
    std::vector<double> vl(p.size());
    for (int s = n_layers - 1; s >= 0; --s) {
        for (std::size_t j = 0; j < p.size(); ++j) vl[j] = v.at(s, static_cast<int>(j));
        layers[static_cast<std::size_t>(s)] =
            psi_layer(p, z, lam, vl, layers[static_cast<std::size_t>(s) + 1]);
    }
    return layers;
}

} // namespace

RadialResult solve_radial(const OperatorParams& p, cplx z, double lam, const RadialPotential& v,
                          int n_layers, double tol) {
    if (!(z.imag() > 0)) throw ValidationError("solve_radial: requires Im z > 0");
    if (std::abs(lam) < 0 || !std::isfinite(lam)) throw ValidationError("solve_radial: bad lambda");
    validate_potential(v);

    const GreenVector unperturbed = solve_fixed_point(p, z, {tol, 2000});
    const GreenVector alt_seed(p.size(), cplx{0.0, 1.0});

    const bool auto_depth = n_layers <= 0;
    int depth = auto_depth ? std::max(50, v.horizon + 10) : n_layers;
    constexpr int kMaxDepth = 1 << 21;

    while (true) {
        auto layers = backward_layers(p, z, lam, v, depth, unperturbed);
        auto check = backward_layers(p, z, lam, v, depth, alt_seed);
        const double gap = gamma_max(layers[0], check[0]);
        if (gap < tol) {
            RadialResult r;
            r.layers = std::move(layers);
            r.n_layers = depth;
            r.seed_gap = gap;
            return r;
        }
        if (!auto_depth || depth >= kMaxDepth) {
            // estimate the depth needed from the observed per-layer decay
            const double gap_half = gamma_max(backward_layers(p, z, lam, v, depth / 2, unperturbed)[0],
                                              backward_layers(p, z, lam, v, depth / 2, alt_seed)[0]);
            double needed = std::numeric_limits<double>::infinity();
            if (gap_half > gap && gap > 0) {
                const double rate = std::pow(gap / gap_half, 2.0 / depth);
                if (rate < 1) needed = depth + std::log(tol / gap) / std::log(rate);
            }
            throw SolveError("solve_radial: seed sensitivity " + std::to_string(gap) +
                                 " above tolerance at " + std::to_string(depth) +
                                 " layers; estimated required depth " + std::to_string(needed),
                             gap);
        }
        depth *= 2;
    }
}

} // namespace conetree
