#pragma once

// Independent ground truth for the recursion solver: dense linear algebra on
// the operator restricted to a truncated tree. Deliberately shares no
// arithmetic with the recursion path -- this header must not include
// green.hpp, and everything here goes through Eigen factorizations.

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "conetree/operators.hpp"
#include "conetree/tree.hpp"

namespace conetree {

constexpr std::int64_t kLuCap = 20'000;
constexpr std::int64_t kEigenCap = 4'000;

/// Dense Hermitian matrix of the restricted operator, row-major n*n storage.
/// Throws SizeCapError above kLuCap vertices.
std::vector<std::complex<double>> assemble_matrix(const TruncatedTree& t, const VertexOperator& vo);

/// Solves (H - z) phi = delta_y by dense complex LU and returns phi(x).
std::complex<double> resolvent_entry(const std::vector<std::complex<double>>& h_matrix,
                                     std::int64_t n, std::complex<double> z, std::int64_t x,
                                     std::int64_t y);

/// Same factorization reused across many entries.
class ResolventOracle {
public:
    ResolventOracle(const std::vector<std::complex<double>>& h_matrix, std::int64_t n,
                    std::complex<double> z);
    ~ResolventOracle();
    ResolventOracle(ResolventOracle&&) noexcept;

    /// column y of the resolvent, i.e. (H - z)^{-1} delta_y
    std::vector<std::complex<double>> column(std::int64_t y) const;
    std::complex<double> entry(std::int64_t x, std::int64_t y) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct EigenHistogram {
    std::vector<double> eigenvalues;     // sorted
    std::vector<double> bin_edges;       // bins+1
    std::vector<double> counts;          // plain eigenvalue counts per bin
    std::vector<double> root_weighted;   // sum |psi_n(root)|^2 per bin (total 1)
};

/// Full dense eigensolve (cap kEigenCap) and histogram over [min,max].
EigenHistogram eigen_histogram(const std::vector<std::complex<double>>& h_matrix, std::int64_t n,
                               int bins, std::int64_t root_index = 0);

} // namespace conetree
