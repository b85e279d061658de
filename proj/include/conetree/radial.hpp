#pragma once

#include <vector>

#include "conetree/green.hpp"

namespace conetree {

/// Potential depending only on (sphere depth, label), values in [-1,1].
/// Sites outside the stored horizon read as the default (0 unless set).
struct RadialPotential {
    int horizon = 0;
    std::size_t n_labels = 0;
    double fallback = 0.0;
    std::vector<std::vector<double>> values;  // (horizon+1) x n_labels

    double at(int s, int label) const {
        if (s < 0 || s > horizon) return fallback;
        return values[static_cast<std::size_t>(s)][static_cast<std::size_t>(label)];
    }
};

RadialPotential make_constant_potential(std::size_t n_labels, int horizon, double value);

/// Throws ValidationError if any stored value (or the fallback) leaves [-1,1].
void validate_potential(const RadialPotential& v);

/// One backward layer of the perturbed recursion:
/// Psi_j(g) = -1 / (z - m_j - lam*v_layer_j + sum_k m_{j,k} g_k).
GreenVector psi_layer(const OperatorParams& p, cplx z, double lam,
                      std::span<const double> v_layer, const GreenVector& g);

struct RadialResult {
    std::vector<GreenVector> layers;  // Gamma_s for s = 0..n_layers
    int n_layers = 0;
    double seed_gap = 0;  // gamma_max at layer 0 between the two seed runs
};

/// Backward recursion seeded at the horizon with the unperturbed fixed point;
/// validity is guarded by re-running from seed i*1 and requiring the layer-0
/// gamma gap below tol. n_layers = 0 picks the depth automatically (doubling
/// from a floor of 50); a fixed n_layers that fails the guard throws
/// SolveError carrying an estimate of the required depth.
RadialResult solve_radial(const OperatorParams& p, cplx z, double lam, const RadialPotential& v,
                          int n_layers = 0, double tol = 1e-10);

} // namespace conetree
