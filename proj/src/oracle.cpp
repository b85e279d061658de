#include "conetree/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "conetree/errors.hpp"

namespace conetree {

namespace {

Eigen::MatrixXcd to_eigen(const std::vector<std::complex<double>>& h, std::int64_t n) {
    if (static_cast<std::int64_t>(h.size()) != n * n)
        throw ValidationError("oracle: matrix storage size mismatch");
    Eigen::MatrixXcd m(n, n);
    for (std::int64_t r = 0; r < n; ++r)
        for (std::int64_t c = 0; c < n; ++c)
            m(r, c) = h[static_cast<std::size_t>(r * n + c)];
    return m;
}

} // namespace

std::vector<std::complex<double>> assemble_matrix(const TruncatedTree& t, const VertexOperator& vo) {
    const std::int64_t n = t.vertex_count();
    if (n > kLuCap)
        throw SizeCapError("oracle: tree with " + std::to_string(n) + " vertices exceeds LU cap");
    if (static_cast<std::int64_t>(vo.w.size()) != n ||
        static_cast<std::int64_t>(vo.t_up.size()) != n)
        throw ValidationError("oracle: vertex operator does not match the tree");

    std::vector<std::complex<double>> h(static_cast<std::size_t>(n * n), {0.0, 0.0});
    for (std::int64_t v = 0; v < n; ++v) {
        h[static_cast<std::size_t>(v * n + v)] = vo.w[static_cast<std::size_t>(v)];
        const std::int64_t par = t.parent[static_cast<std::size_t>(v)];
        if (par >= 0) {
            const auto tv = vo.t_up[static_cast<std::size_t>(v)];
            h[static_cast<std::size_t>(par * n + v)] = tv;
            h[static_cast<std::size_t>(v * n + par)] = std::conj(tv);
        }
    }
    // Hermiticity is structural here; verify anyway
    for (std::int64_t r = 0; r < n; ++r)
        for (std::int64_t c = r; c < n; ++c)
            if (std::abs(h[static_cast<std::size_t>(r * n + c)] -
                         std::conj(h[static_cast<std::size_t>(c * n + r)])) > 0)
                throw ValidationError("oracle: assembled matrix is not Hermitian");
    return h;
}

struct ResolventOracle::Impl {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
    std::int64_t n = 0;
};

ResolventOracle::ResolventOracle(const std::vector<std::complex<double>>& h_matrix, std::int64_t n,
                                 std::complex<double> z)
    : impl_(std::make_unique<Impl>()) {
    if (!(z.imag() > 0)) throw ValidationError("oracle: resolvent requires Im z > 0");
    Eigen::MatrixXcd m = to_eigen(h_matrix, n);
    m.diagonal().array() -= z;
    impl_->lu.compute(m);
    impl_->n = n;
}

ResolventOracle::~ResolventOracle() = default;
ResolventOracle::ResolventOracle(ResolventOracle&&) noexcept = default;

std::vector<std::complex<double>> ResolventOracle::column(std::int64_t y) const {
    if (y < 0 || y >= impl_->n) throw ValidationError("oracle: index out of range");
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(impl_->n);
    rhs(y) = 1.0;
    Eigen::VectorXcd phi = impl_->lu.solve(rhs);
    return {phi.data(), phi.data() + impl_->n};
}

std::complex<double> ResolventOracle::entry(std::int64_t x, std::int64_t y) const {
    if (x < 0 || x >= impl_->n) throw ValidationError("oracle: index out of range");
    return column(y)[static_cast<std::size_t>(x)];
}

std::complex<double> resolvent_entry(const std::vector<std::complex<double>>& h_matrix,
                                     std::int64_t n, std::complex<double> z, std::int64_t x,
                                     std::int64_t y) {
    return ResolventOracle(h_matrix, n, z).entry(x, y);
}

EigenHistogram eigen_histogram(const std::vector<std::complex<double>>& h_matrix, std::int64_t n,
                               int bins, std::int64_t root_index) {
    if (n > kEigenCap)
        throw SizeCapError("oracle: dimension " + std::to_string(n) + " exceeds eigensolve cap");
    if (bins < 1) throw ValidationError("oracle: need at least one bin");
    if (root_index < 0 || root_index >= n) throw ValidationError("oracle: root index out of range");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_eigen(h_matrix, n));
    if (es.info() != Eigen::Success) throw ValidationError("oracle: eigensolve failed");

    EigenHistogram out;
    out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    const double lo = out.eigenvalues.front();
    const double hi = out.eigenvalues.back();
    const double width = (hi > lo) ? (hi - lo) : 1.0;
    out.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        out.bin_edges[static_cast<std::size_t>(b)] = lo + width * b / bins;
    out.counts.assign(static_cast<std::size_t>(bins), 0.0);
    out.root_weighted.assign(static_cast<std::size_t>(bins), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        const double ev = out.eigenvalues[static_cast<std::size_t>(i)];
        auto b = static_cast<std::int64_t>((ev - lo) / width * bins);
        b = std::min<std::int64_t>(std::max<std::int64_t>(b, 0), bins - 1);
        out.counts[static_cast<std::size_t>(b)] += 1.0;
        out.root_weighted[static_cast<std::size_t>(b)] += std::norm(es.eigenvectors()(root_index, i));
    }
    return out;
}

} // namespace conetree
