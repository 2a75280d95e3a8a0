#include "doctest.h"

#include <cmath>
#include <sstream>

#include "fraclab/cantor.hpp"
#include "fraclab/percolation.hpp"
#include "fraclab/qs.hpp"

using namespace fraclab;

namespace {

FatCantorSpec fat22() {
    FatCantorSpec spec;
    spec.N = 2;
    spec.m = 2;
    spec.d = 2;
    return spec;
}

}  // namespace

TEST_CASE("eta_eval") {
    CHECK(eta_eval(DistortionFunction::power(1.0, 1.0), 3.0) == doctest::Approx(3.0));
    CHECK(eta_eval(DistortionFunction::power(0.5, 1.0), 4.0) == doctest::Approx(16.0));
    CHECK(eta_eval(DistortionFunction::power(0.5, 1.0), 0.25) == doctest::Approx(0.5));
    CHECK(eta_eval(DistortionFunction::snowflake(0.5), 0.25) == doctest::Approx(0.5));
    CHECK_THROWS_AS(eta_eval(DistortionFunction::snowflake(0.5), -1.0), DomainError);
    CHECK_THROWS_AS(DistortionFunction::power(1.5, 1.0), DomainError);

    const auto tab = DistortionFunction::tabulated({{0.0, 0.0}, {1.0, 2.0}, {2.0, 3.0}});
    CHECK(tab(0.5) == doctest::Approx(1.0));
    CHECK(tab(1.5) == doctest::Approx(2.5));
    CHECK(tab(4.0) == doctest::Approx(5.0));  // linear continuation
    CHECK_THROWS_AS(DistortionFunction::tabulated({{0.0, 0.0}, {1.0, 0.5}, {2.0, 0.4}}), DomainError);
}

TEST_CASE("verify_qs: identity map has no violations against eta(t)=t") {
    PointSet pts;
    pts.dim = 1;
    pts.coords = {0.0, 0.13, 0.5, 0.77, 1.0};
    const auto report = verify_qs(identity_map(pts), DistortionFunction::power(1.0, 1.0));
    CHECK(report.violations.empty());
    CHECK(report.triples_checked == 5 * 4 * 3);
}

TEST_CASE("verify_qs: snowflake attains eta(t) = t^eps exactly") {
    PointSet pts;
    pts.dim = 1;
    pts.coords = {0.0, 0.25, 1.0};
    const auto map = snowflake_map(pts, 0.5);
    // triple (0, 1, 0.25): image ratio 1/sqrt(0.25) = 2 = eta(4)
    CHECK(map.image.dist(0, 2) / map.image.dist(0, 1) == doctest::Approx(2.0));
    const auto report = verify_qs(map, DistortionFunction::snowflake(0.5));
    CHECK(report.violations.empty());
    CHECK(report.min_equality_gap <= 1e-9);
}

TEST_CASE("verify_qs: x^2 against eta(t)=t reports (0, 1, 0.5)") {
    const auto map = power_map_1d({0.0, 0.5, 1.0}, 2.0);
    const auto report = verify_qs(map, DistortionFunction::power(1.0, 1.0));
    REQUIRE_FALSE(report.violations.empty());
    bool found = false;
    for (const auto& v : report.violations)
        if (v.x == 0 && v.y == 2 && v.z == 1) {
            found = true;
            CHECK(v.image_ratio == doctest::Approx(4.0));
            CHECK(v.bound == doctest::Approx(2.0));
        }
    CHECK(found);
}

TEST_CASE("verify_qs: power map passes its nominal distortion (grid validation)") {
    for (double a : {1.5, 2.0, 3.0}) {
        std::vector<double> xs;
        for (int i = 0; i <= 60; ++i) xs.push_back(static_cast<double>(i) / 60.0);
        const auto report = verify_qs(power_map_1d(xs, a), nominal_eta_power_map(a), 1, 500000);
        CHECK(report.violations.empty());
    }
}

TEST_CASE("verify_qs: invariant under rescaling of either metric") {
    PointSet pts;
    pts.dim = 2;
    pts.coords = {0.0, 0.0, 0.3, 0.1, 0.9, 0.4, 0.2, 0.8};
    const auto eta = DistortionFunction::power(1.0, 1.0);
    const auto base = verify_qs(identity_map(pts), eta);
    const auto scaled = verify_qs(affine_map(pts, 17.0, {3.0, -1.0}), eta);
    CHECK(base.violations.empty());
    CHECK(scaled.violations.empty());
    CHECK(base.worst_excess == doctest::Approx(scaled.worst_excess).epsilon(1e-12));
}

TEST_CASE("verify_qs: triple cap switches to seeded sampling") {
    PointSet pts;
    pts.dim = 1;
    for (int i = 0; i < 100; ++i) pts.coords.push_back(static_cast<double>(i) / 99.0);
    const auto report = verify_qs(identity_map(pts), DistortionFunction::power(1.0, 1.0), 7, 5000);
    CHECK(report.sampled);
    CHECK(report.triples_checked == 5000);
    CHECK(report.violations.empty());
}

TEST_CASE("lemma_bounds_check") {
    PointSet pts;
    pts.dim = 1;
    pts.coords = {0.0, 0.1, 0.2, 0.5, 0.6, 1.0};

    SUBCASE("identity map, A ⊆ B: sandwich holds") {
        const auto map = identity_map(pts);
        const auto eta = DistortionFunction::power(1.0, 1.0);
        const std::vector<std::size_t> A{0, 1, 2};
        const std::vector<std::size_t> B{0, 1, 2, 3, 4, 5};
        const auto report = lemma_bounds_check(map, eta, A, B,
                                               {Lemma::BoundedDistortion});
        CHECK(report.all_satisfied);
    }
    SUBCASE("touching sets: variant bound is 1 + eta(2), identity stays below 1") {
        const auto map = identity_map(pts);
        const auto eta = DistortionFunction::power(1.0, 1.0);
        const std::vector<std::size_t> A{0, 1, 2, 3};
        const std::vector<std::size_t> B{3, 4};  // dist(A,B) = 0
        const auto report = lemma_bounds_check(map, eta, A, B,
                                               {Lemma::BoundedDistortionVariant});
        for (const auto& check : report.checks)
            if (check.lemma == Lemma::BoundedDistortionVariant) {
                CHECK(check.upper == doctest::Approx(3.0));  // 1 + eta(2)
                CHECK(check.lhs <= 1.0);
                CHECK(check.satisfied);
            }
        CHECK(report.all_satisfied);
    }
    SUBCASE("precondition breach names the lemma") {
        const auto map = identity_map(pts);
        const auto eta = DistortionFunction::power(1.0, 1.0);
        CHECK_THROWS_AS(lemma_bounds_check(map, eta, {0, 5}, {1, 2},
                                           {Lemma::BoundedDistortion}),
                        PreconditionError);
    }
}

TEST_CASE("lemma suite holds on percolation samples for identity and snowflake") {
    const auto spec = ModelSpec::classical(3, 0.7, 2);
    const auto res = condition_nonextinct(spec, 4, SeedSpec{2718}, 200);
    const PointSet pts = points_from_tree(res.tree, 60, 5);
    REQUIRE(pts.size() >= 20);

    const auto id = identity_map(pts);
    const auto snow = snowflake_map(pts, 0.5);
    const auto eta_id = DistortionFunction::power(1.0, 1.0);
    const auto eta_sf = DistortionFunction::snowflake(0.5);

    std::uint64_t chain_checked = 0;
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
        // nested A ⊆ B with at least two points each
        const std::size_t n = pts.size();
        std::vector<std::size_t> B;
        for (std::size_t i = 0; i < n; ++i)
            if (mix64(trial, i) % 3 != 0) B.push_back(i);
        if (B.size() < 3) continue;
        std::vector<std::size_t> A;
        for (std::size_t i = 0; i < B.size(); ++i)
            if (mix64(trial ^ 0xABCD, i) % 2 == 0) A.push_back(B[i]);
        if (A.size() < 2) continue;

        // disjoint pair for the variant: split B in two, larger diameter first
        std::vector<std::size_t> C, D;
        for (std::size_t i = 0; i < B.size(); ++i)
            (mix64(trial ^ 0x5150, i) % 2 ? C : D).push_back(B[i]);
        if (C.size() < 2 || D.size() < 2) continue;
        auto diam_of = [&](const std::vector<std::size_t>& s) {
            double m = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i)
                for (std::size_t j = i + 1; j < s.size(); ++j) m = std::max(m, pts.dist(s[i], s[j]));
            return m;
        };
        if (diam_of(C) < diam_of(D)) std::swap(C, D);

        for (const auto* pair : {&id, &snow}) {
            const auto& eta = pair == &id ? eta_id : eta_sf;
            const auto fwd = lemma_bounds_check(*pair, eta, A, B,
                                                {Lemma::BoundedDistortion});
            CHECK(fwd.all_satisfied);
            const auto rev = lemma_bounds_check(*pair, eta, C, D,
                                                {Lemma::BoundedDistortionVariant});
            CHECK(rev.all_satisfied);
            // the proof's intermediate value dominates the reported LHS
            for (const auto& check : rev.checks)
                if (check.lemma == Lemma::BoundedDistortionVariant) {
                    CHECK(rev.chain_intermediate >= check.lhs);
                    ++chain_checked;
                }
        }
    }
    CHECK(chain_checked > 500);
}

TEST_CASE("lemma inequalities hold for the snowflake on fat-Cantor samples") {
    const auto tree = build_fat_cantor(fat22(), 3);
    const PointSet pts = points_from_tree(tree, 50, 9);
    const auto snow = snowflake_map(pts, 0.5);
    const auto eta = DistortionFunction::snowflake(0.5);
    std::uint64_t pairs = 0;
    for (std::uint64_t trial = 0; pairs < 200 && trial < 5000; ++trial) {
        std::vector<std::size_t> B, A;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (mix64(trial ^ 0xFEED, i) % 2 == 0) B.push_back(i);
        for (std::size_t i = 0; i < B.size(); ++i)
            if (mix64(trial ^ 0xBEEF, i) % 2 == 0) A.push_back(B[i]);
        if (A.size() < 2 || B.size() < 3) continue;
        CHECK(lemma_bounds_check(snow, eta, A, B, {Lemma::BoundedDistortion}).all_satisfied);
        ++pairs;
    }
    CHECK(pairs == 200);
}

TEST_CASE("points round trip through CSV") {
    PointSet pts;
    pts.dim = 2;
    pts.coords = {0.0, 0.5, 0.25, 1.0};
    std::ostringstream out;
    points_to_csv(pts, out);
    std::istringstream in(out.str());
    const PointSet back = points_from_csv(in);
    CHECK(back.dim == 2);
    CHECK(back.coords == pts.coords);
}

TEST_CASE("points_from_tree yields distinct in-cube points") {
    const auto tree = build_fat_cantor(fat22(), 3);
    const PointSet pts = points_from_tree(tree, 100, 3);
    CHECK(pts.size() >= 50);
    pts.validate();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int axis = 0; axis < 2; ++axis) {
            CHECK(pts.point(i)[axis] >= 0.0);
            CHECK(pts.point(i)[axis] <= 1.0);
        }
}
