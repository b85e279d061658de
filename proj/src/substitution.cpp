#include "conetree/substitution.hpp"

#include <string>

#include "conetree/errors.hpp"

namespace conetree {

SubstitutionMatrix make_matrix(std::vector<std::vector<std::int64_t>> entries) {
    SubstitutionMatrix m;
    m.entries = std::move(entries);
    m.labels.reserve(m.entries.size());
    for (std::size_t j = 0; j < m.entries.size(); ++j) m.labels.push_back(std::to_string(j + 1));
    return m;
}

namespace {

void check_well_formed(const SubstitutionMatrix& m) {
    const std::size_t n = m.labels.size();
    if (n == 0) throw ValidationError("substitution matrix: empty label set");
    if (m.entries.size() != n)
        throw ValidationError("substitution matrix: row count does not match label count");
    for (const auto& row : m.entries) {
        if (row.size() != n) throw ValidationError("substitution matrix: not square");
        for (auto v : row)
            if (v < 0) throw ValidationError("substitution matrix: negative entry");
    }
}

// boolean reachability product, avoids integer overflow of M^n
std::vector<std::vector<bool>> bool_mul(const std::vector<std::vector<bool>>& a,
                                        const std::vector<std::vector<bool>>& b) {
    const std::size_t n = a.size();
    std::vector<std::vector<bool>> c(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (a[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (b[k][j]) c[i][j] = true;
    return c;
}

bool all_positive(const std::vector<std::vector<bool>>& a) {
    for (const auto& row : a)
        for (bool v : row)
            if (!v) return false;
    return true;
}

} // namespace

AxiomReport check_axioms(const SubstitutionMatrix& m) {
    check_well_formed(m);
    const std::size_t n = m.size();
    AxiomReport r;

    r.m0 = (n > 1) || (m.entries[0][0] > 1);

    r.m1 = true;
    for (std::size_t j = 0; j < n; ++j)
        if (m.entries[j][j] < 1) r.m1 = false;

    // least power <= N^2 with all entries positive (Wielandt region)
    std::vector<std::vector<bool>> base(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) base[i][j] = m.entries[i][j] > 0;
    auto acc = base;
    const int cap = static_cast<int>(n * n);
    for (int k = 1; k <= cap; ++k) {
        if (all_positive(acc)) {
            r.m2 = true;
            r.n = k;
            break;
        }
        acc = bool_mul(acc, base);
    }
    return r;
}

AxiomReport require_axioms(SubstitutionMatrix& m) {
    AxiomReport r = check_axioms(m);
    if (!r.ok()) {
        std::string which;
        if (!r.m0) which += " M0";
        if (!r.m1) which += " M1";
        if (!r.m2) which += " M2";
        throw ValidationError("substitution matrix fails axiom(s):" + which);
    }
    m.primitivity_exponent = r.n;
    return r;
}

std::vector<std::int64_t> matrix_power_row(const SubstitutionMatrix& m, std::size_t root, int n) {
    const std::size_t N = m.size();
    if (root >= N) throw ValidationError("matrix_power_row: root label out of range");
    if (n < 0) throw ValidationError("matrix_power_row: negative power");
    std::vector<std::int64_t> row(N, 0);
    row[root] = 1;
    for (int s = 0; s < n; ++s) {
        std::vector<std::int64_t> next(N, 0);
        for (std::size_t j = 0; j < N; ++j) {
            if (row[j] == 0) continue;
            for (std::size_t k = 0; k < N; ++k) next[k] += row[j] * m.entries[j][k];
        }
        row = std::move(next);
    }
    return row;
}

} // namespace conetree
