#include "doctest.h"

#include <cmath>

#include "fraclab/cantor.hpp"
#include "fraclab/dimension.hpp"
#include "fraclab/experiment.hpp"

using namespace fraclab;

TEST_CASE("box_count: tree mode equals retained counts") {
    const auto full = SurvivalTree::full(ScaleSequence{2, {4}}, 1);
    CHECK(box_count(full, 1) == 16);
    CHECK(box_count_at_scale(full, 0.25) == 16);
    CHECK_THROWS_AS(box_count_at_scale(full, 0.3), ScaleError);
    CHECK_THROWS_AS(box_count(full, 7), ScaleError);

    FatCantorSpec spec;
    spec.N = 2;
    spec.m = 2;
    spec.d = 2;
    const auto cantor = build_fat_cantor(spec, 4);
    for (int level = 0; level <= 4; ++level)
        CHECK(box_count(cantor, level) ==
              static_cast<std::uint64_t>(std::llround(std::pow(15.0, level))));
}

TEST_CASE("box_count: point clouds") {
    PointSet pts;
    pts.dim = 2;
    pts.coords = {0.1, 0.1};
    CHECK(box_count(pts, 0.25) == 1);  // single point occupies one cell
    pts.coords = {0.1, 0.1, 0.9, 0.9, 0.1, 0.9};
    CHECK(box_count(pts, 0.5) == 3);
}

TEST_CASE("estimate_dim") {
    SUBCASE("full grid slope is exactly 2") {
        const auto tree = SurvivalTree::full(ScaleSequence{2, {2, 2, 2, 2, 2}}, 5);
        const auto fit = estimate_dim(tree_count_series(tree), 0, 6);
        CHECK(std::abs(fit.slope - 2.0) <= 1e-9);
        CHECK(fit.residual <= 1e-18);
    }
    SUBCASE("fat Cantor slope is log 15 / log 4") {
        FatCantorSpec spec;
        spec.N = 2;
        spec.m = 2;
        spec.d = 2;
        const auto tree = build_fat_cantor(spec, 5);
        const auto fit = estimate_dim(tree_count_series(tree), 0, 6);
        CHECK(std::abs(fit.slope - std::log(15.0) / std::log(4.0)) <= 1e-9);
    }
    SUBCASE("constant counts give slope 0") {
        BoxCountSeries series;
        for (int n = 0; n < 5; ++n) series.points.push_back({std::pow(0.5, n), 7});
        CHECK(estimate_dim(series, 0, 5).slope == doctest::Approx(0.0));
    }
    SUBCASE("slope is invariant under common rescaling of r") {
        BoxCountSeries series, scaled;
        for (int n = 0; n < 6; ++n) {
            series.points.push_back({std::pow(0.5, n), static_cast<std::uint64_t>(1) << (2 * n)});
            scaled.points.push_back({17.0 * std::pow(0.5, n),
                                     static_cast<std::uint64_t>(1) << (2 * n)});
        }
        CHECK(estimate_dim(series, 0, 6).slope ==
              doctest::Approx(estimate_dim(scaled, 0, 6).slope).epsilon(1e-12));
    }
    SUBCASE("fewer than three scales is insufficient") {
        BoxCountSeries series;
        series.points = {{1.0, 1}, {0.5, 4}};
        CHECK_THROWS_AS(estimate_dim(series, 0, 2), InsufficientData);
    }
}

TEST_CASE("run_mc: records are byte-identical across worker counts") {
    ExperimentConfig config;
    config.model = ModelSpec::classical(2, 0.7, 2);
    config.depth = 4;
    config.trials = 64;
    config.seed = SeedSpec{4242};
    config.analysis = ExperimentConfig::Analysis::Subtree;

    config.workers = 1;
    const auto one = run_mc(config);
    config.workers = 4;
    const auto four = run_mc(config);
    config.workers = 8;
    const auto eight = run_mc(config);
    CHECK(one.text == four.text);
    CHECK(one.text == eight.text);
    CHECK(one.text.find("fraclab-record 1\n") == 0);
    CHECK(one.text.find("workers") == std::string::npos);
}

TEST_CASE("run_mc: volume analysis with conditioning") {
    ExperimentConfig config;
    config.model = ModelSpec::fat(2, ProbSequence::explicit_list({0.5, 0.75}), 2);
    config.depth = 2;
    config.trials = 500;
    config.seed = SeedSpec{7};
    config.workers = 2;
    config.analysis = ExperimentConfig::Analysis::Volume;
    const auto record = run_mc(config);
    CHECK(record.text.find("mean-volume") != std::string::npos);
    CHECK(record.verification_ok);
}
