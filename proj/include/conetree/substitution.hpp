#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace conetree {

/// Substitution matrix over a finite label set: entry (j,k) is the number of
/// label-k forward neighbors a label-j vertex gets.
struct SubstitutionMatrix {
    std::vector<std::string> labels;                 // display names, size N
    std::vector<std::vector<std::int64_t>> entries;  // N x N, nonnegative
    std::optional<int> primitivity_exponent;         // least n with (M^n) > 0, if known

    std::size_t size() const { return labels.size(); }
    std::int64_t at(std::size_t j, std::size_t k) const { return entries[j][k]; }

    std::int64_t row_sum(std::size_t j) const {
        std::int64_t s = 0;
        for (auto v : entries[j]) s += v;
        return s;
    }
};

/// Make an N x N matrix with labels "1".."N".
SubstitutionMatrix make_matrix(std::vector<std::vector<std::int64_t>> entries);

struct AxiomReport {
    bool m0 = false;  // non one-dimensional
    bool m1 = false;  // positive diagonal
    bool m2 = false;  // primitive within the N^2 search cap
    std::optional<int> n;  // least n with (M^n) entrywise positive

    bool ok() const { return m0 && m1 && m2; }
};

/// Validates well-formedness (throws ValidationError on malformed input) and
/// reports the three axioms. Axiom failures are reported, never thrown.
AxiomReport check_axioms(const SubstitutionMatrix& m);

/// check_axioms + throw ValidationError unless all of M0, M1, M2 hold.
/// Fills m.primitivity_exponent as a side effect of the report.
AxiomReport require_axioms(SubstitutionMatrix& m);

/// Integer matrix power row: e_root^T * M^n (used as the sphere-count oracle).
std::vector<std::int64_t> matrix_power_row(const SubstitutionMatrix& m, std::size_t root, int n);

} // namespace conetree
