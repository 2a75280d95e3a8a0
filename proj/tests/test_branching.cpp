#include "doctest.h"

#include <cmath>
#include <random>

#include "fraclab/branching.hpp"
#include "oracles.hpp"

using namespace fraclab;

TEST_CASE("g_eval: closed form values") {
    CHECK(g_eval(2, 0.0) == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK(g_eval(7, 0.0) == doctest::Approx(std::pow(7.0, -5.0)).epsilon(1e-15));
    CHECK(g_eval(2, 0.1) == doctest::Approx(0.04125).epsilon(1e-12));
    CHECK(g_eval(2, 0.2) == doctest::Approx(0.07125).epsilon(1e-12));
    CHECK_THROWS_AS(g_eval(2, -0.1), DomainError);
    CHECK_THROWS_AS(g_eval(2, 1.1), DomainError);
    CHECK_THROWS_AS(g_eval(1, 0.5), DomainError);
}

TEST_CASE("g_eval equals the binomial tail identity") {
    std::mt19937_64 rng(3);
    for (int it = 0; it < 500; ++it) {
        const int N = 2 + static_cast<int>(rng() % 15);
        const double s = static_cast<double>(rng() % 1000000) / 1000000.0;
        const double direct = g_eval(N, s);
        const double tail = oracles::g_by_binomial_tail(N, s);
        CHECK(std::abs(direct - tail) <= 1e-12 * std::max(1.0, std::abs(tail)));
    }
}

TEST_CASE("compose_bound: single level and pair") {
    const auto one = compose_bound({2});
    CHECK(one.q == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK(one.q <= 0.125);

    const auto two = compose_bound({2, 2});
    CHECK(two.q == doctest::Approx(0.0322265625).epsilon(1e-15));
    CHECK(two.rows.size() == 2);
    CHECK(two.rows[0].tail_value == doctest::Approx(0.0322265625).epsilon(1e-15));
    CHECK(two.rows[1].tail_value == doctest::Approx(0.03125).epsilon(1e-15));
}

TEST_CASE("compose_bound: constant N=2 prefixes stay below 1/8") {
    for (int n = 1; n <= 50; ++n) {
        const auto rep = compose_bound(std::vector<long long>(static_cast<std::size_t>(n), 2));
        CHECK(rep.all_within);
        CHECK(rep.q <= 0.125);
        CHECK(rep.p0 >= 0.875);
        for (const auto& row : rep.rows) {
            CHECK(row.tail_value >= 0.0);
            CHECK(row.tail_value < 1.0);
            CHECK(row.tail_value <= 0.125);
        }
    }
}

TEST_CASE("compose_bound: ceilings hold for non-decreasing branching") {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 50; ++it) {
        std::vector<long long> levels;
        long long n = 2 + static_cast<long long>(rng() % 3);
        for (int k = 0; k < 12; ++k) {
            levels.push_back(n);
            n += static_cast<long long>(rng() % 3);
        }
        CHECK(compose_bound(levels).all_within);
    }
}

TEST_CASE("taylor_bound_check") {
    SUBCASE("single points") {
        const auto at0 = taylor_bound_check(2, {0.0});
        CHECK(at0.points[0].lhs == doctest::Approx(at0.points[0].rhs - 0.0).epsilon(1e-15));
        CHECK(at0.all_pass);
        const auto at02 = taylor_bound_check(2, {0.2});
        CHECK(at02.points[0].lhs == doctest::Approx(0.07125).epsilon(1e-12));
        CHECK(at02.points[0].rhs == doctest::Approx(0.67125).epsilon(1e-12));
        CHECK(at02.all_pass);
    }
    SUBCASE("dense grid for N=4") {
        std::vector<double> grid;
        for (int i = 0; i < 10000; ++i) grid.push_back(0.124 * static_cast<double>(i) / 10000.0);
        CHECK(taylor_bound_check(4, grid).all_pass);
    }
    SUBCASE("out of range") {
        CHECK_THROWS_AS(taylor_bound_check(2, {0.25}), DomainError);
        CHECK_THROWS_AS(taylor_bound_check(2, {-0.01}), DomainError);
    }
}

namespace {

SurvivalTree tree_with_root_children(const std::vector<std::uint32_t>& digits) {
    SurvivalTree tree(ScaleSequence{2, {2}});
    std::vector<SurvivalTree::Entry> entries;
    for (auto d : digits) entries.push_back({0, d});
    tree.push_level(std::move(entries));
    return tree;
}

}  // namespace

TEST_CASE("find_subtree: full tree and simple counts") {
    const auto full = SurvivalTree::full(ScaleSequence{1, {2, 2, 2}}, 3);
    const auto whole = find_subtree(full, RequirementSequence::uniform(2, 3));
    REQUIRE(whole.has_value());
    CHECK(*whole == full);

    const auto three = tree_with_root_children({0, 1, 2});
    CHECK_FALSE(find_subtree(three, RequirementSequence::uniform(4, 1)).has_value());
    const auto sub = find_subtree(three, RequirementSequence::uniform(3, 1));
    REQUIRE(sub.has_value());
    CHECK(sub->count(1) == 3);
}

TEST_CASE("find_subtree: agrees with exhaustive subset search") {
    std::mt19937_64 rng(2025);
    int positives = 0;
    for (int it = 0; it < 1200; ++it) {
        const int depth = 1 + static_cast<int>(rng() % 4);
        const int d = 2;
        const int N = 2 + static_cast<int>(rng() % 2);  // branching 4 or 9
        const double p = 0.45 + 0.1 * static_cast<double>(rng() % 5);
        const auto spec = ModelSpec::classical(N, p, d);
        const auto tree = generate(spec, depth, SeedSpec{rng()}, {0, 0});

        RequirementSequence req;
        std::vector<int> oracle_req;
        for (int k = 0; k < depth; ++k) {
            const int limit = N * N;
            const int m = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(limit));
            req.min_children.push_back(m);
            oracle_req.push_back(m);
        }

        const auto found = find_subtree(tree, req);
        const bool expect = oracles::subtree_exists_by_subsets(tree, oracle_req, 0, 0);
        CHECK(found.has_value() == expect);
        if (found) {
            ++positives;
            // extracted subtree satisfies the requirement at every internal node
            for (int level = 0; level < found->depth(); ++level) {
                if (level == found->depth()) break;
                for (std::size_t i = 0; i < found->count(level); ++i)
                    CHECK(found->child_count(level, i) ==
                          static_cast<std::size_t>(req.at(level + 1)));
                // and embeds into the original tree
                for (std::size_t i = 0; i < found->count(level + 1); ++i)
                    CHECK(tree.find(found->address_of(level + 1, i)).has_value());
            }
        }
    }
    CHECK(positives > 50);  // the corpus exercises both outcomes
}

TEST_CASE("find_subtree: monotone in added nodes") {
    std::mt19937_64 rng(4096);
    for (int it = 0; it < 60; ++it) {
        const auto spec_lo = ModelSpec::classical(2, 0.55, 2);
        const auto spec_hi = ModelSpec::classical(2, 0.8, 2);
        const SeedSpec seed{rng()};
        const auto lo = generate(spec_lo, 3, seed, {1, 0});
        const auto hi = generate(spec_hi, 3, seed, {1, 0});  // superset by coupling
        const auto req = RequirementSequence::uniform(3, 3);
        if (find_subtree(lo, req).has_value()) CHECK(find_subtree(hi, req).has_value());
    }
}

TEST_CASE("containment_mc: depth-1 trees match the exact binomial") {
    const auto spec = ModelSpec::classical(2, 0.8, 2);
    const auto rep = containment_mc(spec, 1, 20000, SeedSpec{31415}, 2);
    // P(Bin(4, .8) >= 3)
    const double expect = oracles::binomial_coefficient(4, 3) * std::pow(0.8, 3) * 0.2 +
                          std::pow(0.8, 4);
    const double sigma = std::sqrt(expect * (1.0 - expect) / 20000.0);
    CHECK(std::abs(rep.frequency - expect) <= 3.0 * sigma);
    // Bin(4,.8) misses the thickness hypothesis, so the level is flagged
    CHECK(rep.flagged_levels == std::vector<int>{1});
}

TEST_CASE("containment_mc: p=1 always contains") {
    const auto rep = containment_mc(ModelSpec::classical(2, 1.0, 2), 3, 50, SeedSpec{3}, 1);
    CHECK(rep.frequency == 1.0);
    CHECK(rep.flagged_levels.empty());
}
