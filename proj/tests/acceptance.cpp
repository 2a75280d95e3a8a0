// Acceptance suite: one line per criterion, PASS/FAIL plus timing, exit code
// equals the number of failed criteria.  Usage: fraclab_acceptance <cli-path>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fraclab/branching.hpp"
#include "fraclab/cantor.hpp"
#include "fraclab/dimension.hpp"
#include "fraclab/experiment.hpp"
#include "fraclab/frostman.hpp"
#include "fraclab/qs.hpp"
#include "fraclab/render.hpp"
#include "oracles.hpp"

using namespace fraclab;

namespace {

int failures = 0;
std::string cli_path;

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
        ok = false;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > budget_seconds) {
        ok = false;
        detail += detail.empty() ? "" : "; ";
        detail += "over time budget";
    }
    std::printf("%s  %2d  %-28s  %7.2f s  %s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                elapsed, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

FatCantorSpec fat22() {
    FatCantorSpec spec;
    spec.N = 2;
    spec.m = 2;
    spec.d = 2;
    return spec;
}

bool criterion_g_recursion(std::string& detail) {
    bool ok = true;
    double q_last = 0.0;
    for (int n = 1; n <= 50; ++n) {
        const auto report = compose_bound(std::vector<long long>(static_cast<std::size_t>(n), 2));
        ok = ok && report.all_within && report.q <= 0.125 && report.p0 >= 0.875;
        for (const auto& row : report.rows) ok = ok && row.tail_value <= 0.125;
        q_last = report.q;
    }
    // rigorous certificate: for N = 2 the composition is s -> s^2 + 2^-5;
    // iterate an outward-rounded upper bound so q <= 1/8 holds exactly
    double upper = 0.0;
    for (int n = 0; n < 50; ++n)
        upper = std::nextafter(std::nextafter(upper * upper, 2.0) + 0.03125, 2.0);
    ok = ok && upper <= 0.125;
    char buf[128];
    std::snprintf(buf, sizeof buf, "q(50) = %.12g, outward-rounded upper %.12g <= 1/8", q_last,
                  upper);
    detail = buf;
    return ok;
}

bool criterion_taylor(std::string& detail) {
    std::uint64_t checked = 0;
    for (long long N = 2; N <= 16; ++N) {
        std::vector<double> grid;
        grid.reserve(10000);
        const double limit = 1.0 / (2.0 * static_cast<double>(N));
        for (int i = 0; i < 10000; ++i)
            grid.push_back(limit * static_cast<double>(i) / 10000.0);
        const auto check = taylor_bound_check(N, grid);
        if (!check.all_pass) return false;
        checked += check.points.size();
    }
    detail = std::to_string(checked) + " grid points, zero violations";
    return true;
}

bool criterion_subtree_oracle(std::string& detail) {
    std::uint64_t trees = 0, agreements = 0, positives = 0;
    std::mt19937_64 rng(90210);
    while (trees < 1000) {
        const bool small_branch = trees % 10 < 7;
        const int N = small_branch ? 2 : 3;
        const int depth = 1 + static_cast<int>(rng() % 4);
        // depth-4 trees with branching 9 stay affordable for the subset
        // oracle at moderate retention
        const double p = N == 3 && depth == 4 ? 0.45 + 0.1 * static_cast<double>(rng() % 3)
                                              : 0.45 + 0.1 * static_cast<double>(rng() % 5);
        const auto tree = generate(ModelSpec::classical(N, p, 2), depth, SeedSpec{rng()}, {0, 0});

        RequirementSequence req;
        std::vector<int> oracle_req;
        for (int k = 0; k < depth; ++k) {
            const int m = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(N * N));
            req.min_children.push_back(m);
            oracle_req.push_back(m);
        }
        const bool got = find_subtree(tree, req).has_value();
        const bool expect = oracles::subtree_exists_by_subsets(tree, oracle_req, 0, 0);
        ++trees;
        agreements += got == expect;
        positives += expect;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%llu/%llu agree (%llu positive)",
                  static_cast<unsigned long long>(agreements),
                  static_cast<unsigned long long>(trees),
                  static_cast<unsigned long long>(positives));
    detail = buf;
    return agreements == trees;
}

bool criterion_containment_mc(std::string& detail) {
    // all N^d children with probability 1 - N^{-6d}, else empty
    const double keep_all = 1.0 - std::pow(2.0, -12.0);
    const auto spec = ModelSpec::thick(2, ProbSequence::constant_prob(keep_all), 2);
    const auto report = containment_mc(spec, 6, 10000, SeedSpec{460}, 2);
    const double sigma = std::sqrt(0.875 * 0.125 / 10000.0);
    char buf[128];
    std::snprintf(buf, sizeof buf, "frequency %.4f >= 0.875 - 3*%.4f (bound p0 = %.6f)",
                  report.frequency, sigma, report.p0);
    detail = buf;
    return report.frequency >= 0.875 - 3.0 * sigma && report.flagged_levels.empty();
}

bool criterion_gap_oracle(std::string& detail) {
    std::uint64_t checked = 0;
    // exhaustive single-level configurations for d=2, N<=3
    for (int N = 2; N <= 3; ++N) {
        const auto cells = static_cast<std::uint32_t>(N * N);
        for (std::uint32_t mask = 0; mask < (1u << cells); ++mask) {
            std::vector<std::uint32_t> kids;
            for (std::uint32_t c = 0; c < cells; ++c)
                if ((mask >> c) & 1u) kids.push_back(c);
            if (fraclab::detail::max_gap_cells(kids, N, 2) !=
                oracles::vertical_gap_cells_by_intervals(kids, N, 2))
                return false;
            ++checked;
        }
    }
    // randomized cases across d<=3, N<=4
    std::mt19937_64 rng(5005);
    for (int it = 0; it < 10000; ++it) {
        const int d = 1 + static_cast<int>(rng() % 3);
        const int N = 2 + static_cast<int>(rng() % 3);
        std::uint64_t cells = 1;
        for (int axis = 0; axis < d; ++axis) cells *= static_cast<std::uint64_t>(N);
        std::vector<std::uint32_t> kids;
        const int fill = 20 + static_cast<int>(rng() % 70);
        for (std::uint32_t c = 0; c < cells; ++c)
            if (static_cast<int>(rng() % 100) < fill) kids.push_back(c);
        if (fraclab::detail::max_gap_cells(kids, N, d) !=
            oracles::vertical_gap_cells_by_intervals(kids, N, d))
            return false;
        ++checked;
    }
    detail = std::to_string(checked) + " configurations, 100% agreement";
    return true;
}

bool criterion_frostman_bracketing(std::string& detail) {
    // four construction steps of the (2,2)-fat Cantor set = dyadic depth 8
    const auto tree = build_fat_cantor(fat22(), 4);
    const auto dt = image_diameters_identity(tree);

    const auto low = frostman_verify(build_measure_fat(dt, 1.93), dt, 1.93);
    const auto high = frostman_verify(build_measure_fat(dt, 1.97), dt, 1.97);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "alpha=1.93 %s, alpha=1.97 %s, critical log15/log4 = %.4f",
                  low.pass ? "pass" : "FAIL", high.pass ? "fail expected, got pass" : "fail",
                  std::log(15.0) / std::log(4.0));
    detail = buf;
    return low.pass && !high.pass;
}

bool criterion_subadditivity(std::string& detail) {
    const auto tree = build_fat_cantor(fat22(), 4);
    const auto dt = image_diameters_identity(tree);
    const double alpha = 1.93;
    const auto report = subadditivity_check(dt, alpha);
    const double expect = 15.0 * std::pow(4.0, -alpha);
    double worst_err = 0.0;
    for (const auto& row : report.rows)
        worst_err = std::max(worst_err, std::abs(row.ratio - expect) / expect);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu nodes, worst relative error %.2e vs 15*4^-alpha",
                  report.rows.size(), worst_err);
    detail = buf;
    return worst_err <= 1e-10;
}

bool criterion_qs(std::string& detail) {
    const auto tree = build_fat_cantor(fat22(), 4);
    const PointSet pts = points_from_tree(tree, 200, 17);
    if (pts.size() != 200) {
        detail = "sample size " + std::to_string(pts.size());
        return false;
    }
    const auto snow = verify_qs(snowflake_map(pts, 0.5), DistortionFunction::snowflake(0.5), 61);
    const bool snow_ok = snow.violations.empty() && snow.min_equality_gap <= 1e-9;

    const auto square = verify_qs(power_map_1d({0.0, 0.5, 1.0}, 2.0),
                                  DistortionFunction::power(1.0, 1.0));
    bool square_ok = false;
    for (const auto& v : square.violations)
        if (v.x == 0 && v.y == 2 && v.z == 1 && std::abs(v.image_ratio - 4.0) < 1e-12 &&
            std::abs(v.bound - 2.0) < 1e-12)
            square_ok = true;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "snowflake: %zu violations, equality gap %.1e; x^2: triple (0,1,0.5) %s",
                  snow.violations.size(), snow.min_equality_gap,
                  square_ok ? "reported" : "missing");
    detail = buf;
    return snow_ok && square_ok;
}

bool criterion_lemmas(std::string& detail) {
    const auto spec = ModelSpec::classical(3, 0.7, 2);
    const auto res = condition_nonextinct(spec, 4, SeedSpec{2718}, 200);
    const PointSet pts = points_from_tree(res.tree, 80, 5);
    const auto id = identity_map(pts);
    const auto snow = snowflake_map(pts, 0.5);
    const auto eta_id = DistortionFunction::power(1.0, 1.0);
    const auto eta_sf = DistortionFunction::snowflake(0.5);

    std::uint64_t pairs = 0;
    for (std::uint64_t trial = 0; pairs < 1000; ++trial) {
        if (trial > 100000) {
            detail = "pair generator stalled";
            return false;
        }
        const std::size_t n = pts.size();
        std::vector<std::size_t> B;
        for (std::size_t i = 0; i < n; ++i)
            if (mix64(trial, i) % 3 != 0) B.push_back(i);
        std::vector<std::size_t> A;
        for (std::size_t i = 0; i < B.size(); ++i)
            if (mix64(trial ^ 0xABCD, i) % 2 == 0) A.push_back(B[i]);
        std::vector<std::size_t> C, D;
        for (std::size_t i = 0; i < B.size(); ++i)
            (mix64(trial ^ 0x5150, i) % 2 ? C : D).push_back(B[i]);
        if (A.size() < 2 || C.size() < 2 || D.size() < 2) continue;
        auto diam_of = [&](const std::vector<std::size_t>& s) {
            double m = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i)
                for (std::size_t j = i + 1; j < s.size(); ++j)
                    m = std::max(m, pts.dist(s[i], s[j]));
            return m;
        };
        if (diam_of(C) < diam_of(D)) std::swap(C, D);

        for (const auto* map : {&id, &snow}) {
            const auto& eta = map == &id ? eta_id : eta_sf;
            if (!lemma_bounds_check(*map, eta, A, B, {Lemma::BoundedDistortion}).all_satisfied)
                return false;
            if (!lemma_bounds_check(*map, eta, C, D, {Lemma::BoundedDistortionVariant})
                     .all_satisfied)
                return false;
        }
        ++pairs;
    }
    detail = std::to_string(pairs) + " (A,B) pairs x {identity, snowflake}, zero violations";
    return true;
}

bool criterion_dimension(std::string& detail) {
    const auto grid = SurvivalTree::full(ScaleSequence{2, std::vector<int>(6, 2)}, 6);
    const auto grid_fit = estimate_dim(tree_count_series(grid), 0, 7);
    if (std::abs(grid_fit.slope - 2.0) > 1e-9) {
        detail = "grid slope " + std::to_string(grid_fit.slope);
        return false;
    }

    const auto cantor = build_fat_cantor(fat22(), 5);
    const auto cantor_fit = estimate_dim(tree_count_series(cantor), 0, 6);
    const double critical = std::log(15.0) / std::log(4.0);
    if (std::abs(cantor_fit.slope - critical) > 1e-9) {
        detail = "fat Cantor slope " + std::to_string(cantor_fit.slope);
        return false;
    }

    // fat percolation, conditioned non-extinct, slope over the last 5 scales
    const auto spec = ModelSpec::fat(2, ProbSequence::one_minus_geometric(1.0, 0.5), 2);
    const SeedSpec seed{31416};
    double slope_sum = 0.0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const auto res = condition_nonextinct(spec, 8, seed, 1000,
                                              static_cast<std::uint64_t>(t));
        slope_sum += estimate_dim(tree_count_series(res.tree), 4, 5).slope;
    }
    const double mean_slope = slope_sum / trials;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "grid 2 exact, Cantor %.9f, fat percolation mean slope %.4f >= 1.9",
                  cantor_fit.slope, mean_slope);
    detail = buf;
    return mean_slope >= 1.9;
}

bool criterion_dense_extraction(std::string& detail) {
    // full trees: pipeline succeeds and the 27d closing bound holds
    for (const auto& levels : std::vector<std::vector<int>>{{8, 16}, {16, 32}}) {
        const auto tree = SurvivalTree::full(ScaleSequence{2, levels}, 2);
        const auto got = extract_dense_subset(tree, 0.5, 0);
        if (!got) {
            detail = "full-tree extraction failed";
            return false;
        }
        std::vector<double> deltas;
        for (std::size_t k = 0; k < levels.size(); ++k)
            deltas.push_back(27.0 * 2.0 * overline_log(0.5, levels[k]) / levels[k]);
        if (!check_dense(got->subtree, deltas, 0).empty()) {
            detail = "closing gap bound violated on a full tree";
            return false;
        }
    }

    // Monte Carlo at the configured scale: N_n = 4*2^n = (8,16,32,64)
    const auto spec = ModelSpec::dense(BranchSequence::geometric_ceil(4.0, 2.0), 0.5, 2);
    const auto report = extract_dense_mc(spec, 4, 1000, SeedSpec{8128}, 1000, 2);
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "full trees pass 27d bound; MC frequency %.4f >= p0 - 3 sigma = %.4f (M = %d,%d,%d,%d)",
                  report.frequency, report.p0 - 3.0 * report.sigma, report.m_values[0],
                  report.m_values[1], report.m_values[2], report.m_values[3]);
    detail = buf;
    return report.frequency >= report.p0 - 3.0 * report.sigma;
}

bool criterion_determinism(std::string& detail) {
    // library level: identical records under 1, 4 and 8 workers, twice each
    ExperimentConfig config;
    config.model = ModelSpec::classical(2, 0.7, 2);
    config.depth = 5;
    config.trials = 200;
    config.seed = SeedSpec{99};
    config.analysis = ExperimentConfig::Analysis::Subtree;
    std::string reference;
    for (int workers : {1, 4, 8, 1, 4, 8}) {
        config.workers = workers;
        const auto record = run_mc(config);
        if (reference.empty()) reference = record.text;
        if (record.text != reference) {
            detail = "library records differ across workers";
            return false;
        }
    }

    // process level: the shipped binary, twice per worker count
    if (cli_path.empty()) {
        detail = "cli path missing";
        return false;
    }
    std::string first;
    for (int run = 0; run < 2; ++run)
        for (int workers : {1, 4, 8}) {
            const std::string dir = "acceptance_mc_w" + std::to_string(workers) + "_r" +
                                    std::to_string(run);
            const std::string cmd = cli_path +
                                    " mc --model classical -N 2 -d 2 -p 0.7 --depth 5"
                                    " --trials 200 --seed 99 --analysis subtree --workers " +
                                    std::to_string(workers) + " -o " + dir + " 2>/dev/null";
            if (std::system(cmd.c_str()) != 0) {
                detail = "cli invocation failed";
                return false;
            }
            std::ifstream in(dir + "/record.txt", std::ios::binary);
            std::stringstream buffer;
            buffer << in.rdbuf();
            if (first.empty()) first = buffer.str();
            if (buffer.str() != first || first.empty()) {
                detail = "cli records differ across workers";
                return false;
            }
        }
    if (first != reference) {
        detail = "cli and library records differ";
        return false;
    }
    detail = "6 library + 6 cli runs, byte-identical records";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) cli_path = argv[1];
    std::printf("fraclab acceptance suite\n");
    run_criterion(1, "g-recursion bound", 1.0, criterion_g_recursion);
    run_criterion(2, "Taylor bound", 5.0, criterion_taylor);
    run_criterion(3, "subtree oracle equivalence", 60.0, criterion_subtree_oracle);
    run_criterion(4, "containment Monte Carlo", 120.0, criterion_containment_mc);
    run_criterion(5, "vertical-gap oracle", 60.0, criterion_gap_oracle);
    run_criterion(6, "Frostman bracketing", 120.0, criterion_frostman_bracketing);
    run_criterion(7, "subadditivity closed form", 10.0, criterion_subadditivity);
    run_criterion(8, "QS verification", 60.0, criterion_qs);
    run_criterion(9, "lemma suite", 60.0, criterion_lemmas);
    run_criterion(10, "dimension slopes", 300.0, criterion_dimension);
    run_criterion(11, "dense extraction pipeline", 600.0, criterion_dense_extraction);
    run_criterion(12, "determinism", 120.0, criterion_determinism);
    if (failures == 0) std::printf("all criteria passed\n");
    else std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
