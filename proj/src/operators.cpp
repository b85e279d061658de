#include "conetree/operators.hpp"

#include <cmath>
#include <string>

#include "conetree/errors.hpp"

namespace conetree {

void validate_params(const OperatorParams& p, const SubstitutionMatrix& m) {
    const std::size_t N = m.size();
    if (p.diag.size() != N || p.offdiag.size() != N)
        throw ValidationError("operator params: size does not match label set");
    for (std::size_t j = 0; j < N; ++j) {
        if (p.offdiag[j].size() != N) throw ValidationError("operator params: offdiag not square");
        if (!std::isfinite(p.diag[j])) throw ValidationError("operator params: non-finite diagonal");
        for (std::size_t k = 0; k < N; ++k) {
            const double v = p.offdiag[j][k];
            if (!std::isfinite(v) || v < 0)
                throw ValidationError("operator params: offdiag entries must be finite and >= 0");
            const bool mz = m.entries[j][k] == 0;
            if (mz != (v == 0.0))
                throw ValidationError("operator params: zero pattern differs from substitution matrix at (" +
                                      std::to_string(j) + "," + std::to_string(k) + ")");
        }
    }
}

OperatorParams build_adjacency(const SubstitutionMatrix& m) {
    const std::size_t N = m.size();
    OperatorParams p;
    p.diag.assign(N, 0.0);
    p.offdiag.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        p.offdiag[j].resize(N);
        for (std::size_t k = 0; k < N; ++k) p.offdiag[j][k] = static_cast<double>(m.entries[j][k]);
    }
    return p;
}

OperatorParams build_laplacian_dirichlet(const SubstitutionMatrix& m) {
    OperatorParams p = build_adjacency(m);
    for (std::size_t j = 0; j < m.size(); ++j)
        p.diag[j] = 1.0 + static_cast<double>(m.row_sum(j));
    return p;
}

OperatorParams build_normalized_laplacian(const SubstitutionMatrix& m) {
    const std::size_t N = m.size();
    OperatorParams p;
    p.diag.assign(N, 1.0);
    p.offdiag.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double nu = 1.0 + static_cast<double>(m.row_sum(j));
        p.offdiag[j].resize(N);
        for (std::size_t k = 0; k < N; ++k)
            p.offdiag[j][k] = static_cast<double>(m.entries[j][k]) / (nu * nu);
    }
    return p;
}

RegularityReport classify_regular(const OperatorParams& p) {
    constexpr double kRelTol = 1e-12;
    RegularityReport r;
    const std::size_t N = p.size();
    if (N == 0) return r;
    const double k0 = p.row_sum(0);
    const double w0 = p.diag[0];
    for (std::size_t j = 1; j < N; ++j) {
        const double kj = p.row_sum(j);
        if (std::abs(kj - k0) > kRelTol * std::max({1.0, std::abs(k0), std::abs(kj)})) return r;
        if (std::abs(p.diag[j] - w0) > kRelTol * std::max({1.0, std::abs(w0), std::abs(p.diag[j])}))
            return r;
    }
    r.regular = true;
    r.k = k0;
    r.w = w0;
    return r;
}

VertexOperator realize_on_tree(const OperatorParams& p, const TruncatedTree& t) {
    validate_params(p, t.matrix);
    const std::int64_t n = t.vertex_count();
    VertexOperator vo;
    vo.t_up.assign(static_cast<std::size_t>(n), {0.0, 0.0});
    vo.w.resize(static_cast<std::size_t>(n));
    vo.nu.assign(static_cast<std::size_t>(n), 1.0);
    for (std::int64_t v = 0; v < n; ++v) {
        const auto vi = static_cast<std::size_t>(v);
        const int lk = t.label[vi];
        vo.w[vi] = p.diag[static_cast<std::size_t>(lk)];
        const std::int64_t par = t.parent[vi];
        if (par >= 0) {
            const int lj = t.label[static_cast<std::size_t>(par)];
            const double msub = static_cast<double>(
                t.matrix.entries[static_cast<std::size_t>(lj)][static_cast<std::size_t>(lk)]);
            vo.t_up[vi] = std::sqrt(p.offdiag[static_cast<std::size_t>(lj)][static_cast<std::size_t>(lk)] / msub);
        }
    }
    return vo;
}

std::vector<double> moderate_growth_indicator(const std::vector<double>& tn) {
    if (tn.empty()) throw ValidationError("moderate_growth_indicator: empty sequence");
    for (double v : tn)
        if (!(v > 0)) throw ValidationError("moderate_growth_indicator: entries must be positive");
    std::vector<double> s;
    if (tn.size() < 2) return s;
    s.reserve(tn.size() - 1);
    double acc = 0;
    for (std::size_t n = 0; n + 1 < tn.size(); ++n) {
        acc += 1.0 / tn[n];
        s.push_back(acc / tn[n + 1]);
    }
    return s;
}

} // namespace conetree
