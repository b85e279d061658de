#pragma once

#include <cstdint>
#include <vector>

#include "conetree/substitution.hpp"

namespace conetree {

/// Explicit rooted labeled tree, truncated at a fixed depth. Vertices are laid
/// out in BFS order, so every sphere is a contiguous index range and the
/// children of each vertex form a contiguous range in the next sphere,
/// emitted in label order.
struct TruncatedTree {
    SubstitutionMatrix matrix;        // generator
    int depth_limit = 0;
    int root_label = 0;

    std::vector<int> label;           // per vertex
    std::vector<int> depth;           // per vertex
    std::vector<std::int64_t> parent; // -1 for the root
    std::vector<std::int64_t> first_child;
    std::vector<std::int64_t> child_count;
    std::vector<std::int64_t> sphere_start;  // size depth_limit+2; sphere n = [start[n], start[n+1])

    std::int64_t vertex_count() const { return static_cast<std::int64_t>(label.size()); }
    std::int64_t sphere_size(int n) const { return sphere_start[n + 1] - sphere_start[n]; }
};

constexpr std::int64_t kDefaultVertexCap = 5'000'000;

/// Deterministic BFS construction. Requires M0-M2 (throws ValidationError) and
/// throws SizeCapError if the vertex count would exceed `vertex_cap`.
TruncatedTree build_truncated_tree(const SubstitutionMatrix& m, int root_label, int depth,
                                   std::int64_t vertex_cap = kDefaultVertexCap);

/// Per-label counts in sphere n (0 <= n <= depth_limit). Equals the root-label
/// row of M^n.
std::vector<std::int64_t> sphere_label_counts(const TruncatedTree& t, int n);

} // namespace conetree
