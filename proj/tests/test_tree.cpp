#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "conetree/errors.hpp"
#include "conetree/tree.hpp"

using namespace conetree;

namespace {

SubstitutionMatrix random_valid_matrix(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nd(1, 4), ed(0, 3);
    for (;;) {
        const int n = nd(rng);
        std::vector<std::vector<std::int64_t>> e(static_cast<std::size_t>(n),
                                                 std::vector<std::int64_t>(static_cast<std::size_t>(n)));
        for (auto& row : e)
            for (auto& v : row) v = ed(rng);
        for (int j = 0; j < n; ++j)
            if (e[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] == 0)
                e[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = 1;
        if (n == 1 && e[0][0] < 2) e[0][0] = 2;
        SubstitutionMatrix m = make_matrix(e);
        if (check_axioms(m).ok()) return m;
    }
}

} // namespace

TEST_CASE("axiom reports on the reference matrices") {
    auto r = check_axioms(make_matrix({{2, 1}, {1, 1}}));
    CHECK(r.m0);
    CHECK(r.m1);
    CHECK(r.m2);
    REQUIRE(r.n.has_value());
    CHECK(*r.n == 1);

    // Fibonacci: no positive diagonal, primitive in two steps
    r = check_axioms(make_matrix({{1, 1}, {1, 0}}));
    CHECK(r.m0);
    CHECK_FALSE(r.m1);
    CHECK(r.m2);
    CHECK(*r.n == 2);

    r = check_axioms(make_matrix({{1}}));
    CHECK_FALSE(r.m0);

    r = check_axioms(make_matrix({{0, 2}, {1, 0}}));
    CHECK_FALSE(r.m1);
    CHECK_FALSE(r.m2);  // period-2 cycle, no power is entrywise positive
}

TEST_CASE("axiom checking reports, construction validates") {
    SubstitutionMatrix fib = make_matrix({{1, 1}, {1, 0}});
    CHECK_NOTHROW(check_axioms(fib));
    CHECK_THROWS_AS(build_truncated_tree(fib, 0, 3), ValidationError);
    CHECK_THROWS_AS(check_axioms(make_matrix({{2, -1}, {1, 1}})), ValidationError);
}

TEST_CASE("truncated tree spheres for M=[[2,1],[1,1]]") {
    const auto m = make_matrix({{2, 1}, {1, 1}});

    auto t = build_truncated_tree(m, 0, 1);
    CHECK(t.sphere_size(0) == 1);
    CHECK(t.sphere_size(1) == 3);

    t = build_truncated_tree(m, 0, 2);
    CHECK(t.sphere_size(2) == 8);

    CHECK(sphere_label_counts(t, 0) == std::vector<std::int64_t>{1, 0});
    CHECK(sphere_label_counts(t, 1) == std::vector<std::int64_t>{2, 1});
    CHECK(sphere_label_counts(t, 2) == std::vector<std::int64_t>{5, 3});
    CHECK_THROWS_AS(sphere_label_counts(t, 3), ValidationError);

    const auto single = build_truncated_tree(m, 0, 0);
    CHECK(single.vertex_count() == 1);
    CHECK(single.parent[0] == -1);
    CHECK(single.depth[0] == 0);
}

TEST_CASE("sphere counts match integer matrix powers on random matrices") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = random_valid_matrix(rng);
        const int root = static_cast<int>(rng() % m.size());
        const auto t = build_truncated_tree(m, root, 5, 2'000'000);
        for (int n = 0; n <= 5; ++n)
            CHECK(sphere_label_counts(t, n) == matrix_power_row(m, static_cast<std::size_t>(root), n));
    }
}

TEST_CASE("construction is deterministic") {
    const auto m = make_matrix({{1, 2}, {1, 1}});
    const auto a = build_truncated_tree(m, 1, 6);
    const auto b = build_truncated_tree(m, 1, 6);
    CHECK(a.label == b.label);
    CHECK(a.parent == b.parent);
    CHECK(a.first_child == b.first_child);
}

TEST_CASE("children are emitted in label order under the parent") {
    const auto m = make_matrix({{2, 1}, {1, 1}});
    const auto t = build_truncated_tree(m, 0, 3);
    for (std::int64_t v = 0; v < t.vertex_count(); ++v) {
        const auto vi = static_cast<std::size_t>(v);
        for (std::int64_t c = 0; c + 1 < t.child_count[vi]; ++c) {
            const auto a = static_cast<std::size_t>(t.first_child[vi] + c);
            CHECK(t.label[a] <= t.label[a + 1]);
        }
        if (t.depth[vi] < t.depth_limit) CHECK(t.child_count[vi] >= 2);
    }
}

TEST_CASE("axioms force at least two forward neighbors everywhere") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = random_valid_matrix(rng);
        for (std::size_t j = 0; j < m.size(); ++j) CHECK(m.row_sum(j) >= 2);
    }
}

TEST_CASE("vertex cap raises a size error") {
    const auto m = make_matrix({{2}});
    CHECK_THROWS_AS(build_truncated_tree(m, 0, 40), SizeCapError);
    CHECK_THROWS_AS(build_truncated_tree(m, 0, 10, 100), SizeCapError);
}
