#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "conetree/tree.hpp"

namespace conetree {

/// Reduced coefficients of a label-invariant operator: offdiag[j][k] is the
/// m_{j,k} weight feeding label-j recursion rows, diag[j] the onsite term.
struct OperatorParams {
    std::vector<std::vector<double>> offdiag;  // N x N, >= 0, zero pattern == matrix
    std::vector<double> diag;                  // N

    std::size_t size() const { return diag.size(); }
    double row_sum(std::size_t j) const {
        double s = 0;
        for (double v : offdiag[j]) s += v;
        return s;
    }
};

/// Throws ValidationError unless finite, nonnegative offdiag with the same
/// zero pattern as m (and positive diagonal wherever M_{j,j} > 0).
void validate_params(const OperatorParams& p, const SubstitutionMatrix& m);

OperatorParams build_adjacency(const SubstitutionMatrix& m);
OperatorParams build_laplacian_dirichlet(const SubstitutionMatrix& m);
OperatorParams build_normalized_laplacian(const SubstitutionMatrix& m);

struct RegularityReport {
    bool regular = false;
    std::optional<double> k;  // common row sum
    std::optional<double> w;  // common diagonal
};

/// Regular iff all offdiag row sums agree and all diagonal entries agree
/// (1e-12 relative).
RegularityReport classify_regular(const OperatorParams& p);

/// Concrete operator on a truncated tree: symmetric edge weights, per-vertex
/// diagonal, measure nu (== 1 for all realizations produced here).
struct VertexOperator {
    std::vector<std::complex<double>> t_up;  // per vertex: weight of the edge to its parent (0 at root)
    std::vector<double> w;                   // per vertex diagonal
    std::vector<double> nu;                  // per vertex measure
};

/// nu == 1, t(x,y) = sqrt(m_{a(x),a(y)}/M_{a(x),a(y)}) on each parent->child
/// edge, w(x) = m_{a(x)}. Throws ValidationError on zero-pattern mismatch.
VertexOperator realize_on_tree(const OperatorParams& p, const TruncatedTree& t);

/// s_n = (1/t_{n+1}) * sum_{k<=n} 1/t_k for n = 0..len-2. Unbounded growth of
/// s_n is the moderate-off-diagonal-growth indicator; constant input gives a
/// linearly growing sequence. Throws ValidationError on nonpositive entries.
std::vector<double> moderate_growth_indicator(const std::vector<double>& tn);

} // namespace conetree
