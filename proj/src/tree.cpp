#include "conetree/tree.hpp"

#include <string>

#include "conetree/errors.hpp"

namespace conetree {

TruncatedTree build_truncated_tree(const SubstitutionMatrix& m, int root_label, int depth,
                                   std::int64_t vertex_cap) {
    SubstitutionMatrix mm = m;
    require_axioms(mm);
    const std::size_t N = mm.size();
    if (root_label < 0 || static_cast<std::size_t>(root_label) >= N)
        throw ValidationError("build_truncated_tree: root label out of range");
    if (depth < 0) throw ValidationError("build_truncated_tree: negative depth");

    // predicted size from sphere counts; refuse before allocating
    std::int64_t total = 0;
    for (int n = 0; n <= depth; ++n) {
        std::int64_t sz = 0;
        for (auto v : matrix_power_row(mm, static_cast<std::size_t>(root_label), n)) sz += v;
        total += sz;
        if (total > vertex_cap)
            throw SizeCapError("build_truncated_tree: vertex count exceeds cap of " +
                               std::to_string(vertex_cap));
    }

    TruncatedTree t;
    t.matrix = mm;
    t.depth_limit = depth;
    t.root_label = root_label;
    t.label.reserve(static_cast<std::size_t>(total));
    t.depth.reserve(static_cast<std::size_t>(total));
    t.parent.reserve(static_cast<std::size_t>(total));
    t.first_child.assign(static_cast<std::size_t>(total), -1);
    t.child_count.assign(static_cast<std::size_t>(total), 0);
    t.sphere_start.assign(static_cast<std::size_t>(depth) + 2, 0);

    t.label.push_back(root_label);
    t.depth.push_back(0);
    t.parent.push_back(-1);
    t.sphere_start[0] = 0;
    t.sphere_start[1] = 1;

    std::int64_t level_begin = 0, level_end = 1;
    for (int d = 0; d < depth; ++d) {
        for (std::int64_t v = level_begin; v < level_end; ++v) {
            const int lj = t.label[static_cast<std::size_t>(v)];
            t.first_child[static_cast<std::size_t>(v)] = static_cast<std::int64_t>(t.label.size());
            std::int64_t cnt = 0;
            for (std::size_t k = 0; k < N; ++k) {  // label order
                for (std::int64_t rep = 0; rep < mm.entries[static_cast<std::size_t>(lj)][k]; ++rep) {
                    t.label.push_back(static_cast<int>(k));
                    t.depth.push_back(d + 1);
                    t.parent.push_back(v);
                    ++cnt;
                }
            }
            t.child_count[static_cast<std::size_t>(v)] = cnt;
        }
        level_begin = level_end;
        level_end = static_cast<std::int64_t>(t.label.size());
        t.sphere_start[static_cast<std::size_t>(d) + 2] = level_end;
    }
    return t;
}

std::vector<std::int64_t> sphere_label_counts(const TruncatedTree& t, int n) {
    if (n < 0 || n > t.depth_limit)
        throw ValidationError("sphere_label_counts: depth out of range");
    std::vector<std::int64_t> counts(t.matrix.size(), 0);
    for (std::int64_t v = t.sphere_start[static_cast<std::size_t>(n)];
         v < t.sphere_start[static_cast<std::size_t>(n) + 1]; ++v)
        ++counts[static_cast<std::size_t>(t.label[static_cast<std::size_t>(v)])];
    return counts;
}

} // namespace conetree
