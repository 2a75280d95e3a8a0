// fraclab: generate fractal percolation realizations, find the deterministic
// Cantor subsets inside them, and run the verification toolkit from the
// command line.  Exit codes: 0 all selected checks passed, 2 a verification
// failed (violations found / nothing extracted), 1 execution error.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fraclab/branching.hpp"
#include "fraclab/cantor.hpp"
#include "fraclab/dimension.hpp"
#include "fraclab/experiment.hpp"
#include "fraclab/frostman.hpp"
#include "fraclab/qs.hpp"
#include "fraclab/render.hpp"

using namespace fraclab;

namespace {

struct ModelFlags {
    std::string kind = "classical";
    int d = 2;
    int N = 2;
    std::vector<int> Ns;
    double N_b = 0.0, N_r = 2.0;
    double p = 0.5;
    std::vector<double> probs;
    double p_c = 0.0, p_a = 0.5;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", kind, "classical|fat|dense|thick")
            ->check(CLI::IsMember({"classical", "fat", "dense", "thick"}));
        cmd->add_option("-d,--dimension", d, "spatial dimension");
        cmd->add_option("-N,--branching", N, "constant subdivision factor");
        cmd->add_option("--Ns", Ns, "explicit per-level subdivision factors")->delimiter(',');
        cmd->add_option("--N-b", N_b, "N_n = ceil(b * r^n): b");
        cmd->add_option("--N-r", N_r, "N_n = ceil(b * r^n): r");
        cmd->add_option("-p,--prob", p, "constant retention probability");
        cmd->add_option("--probs", probs, "explicit per-level probabilities")->delimiter(',');
        cmd->add_option("--p-c", p_c, "p_n = 1 - c * a^n: c");
        cmd->add_option("--p-a", p_a, "p_n = 1 - c * a^n: a");
    }

    ModelSpec build() const {
        BranchSequence branch = !Ns.empty() ? BranchSequence::explicit_list(Ns)
                                : N_b > 0.0 ? BranchSequence::geometric_ceil(N_b, N_r)
                                            : BranchSequence::constant_branch(N);
        ProbSequence prob = !probs.empty() ? ProbSequence::explicit_list(probs)
                            : p_c > 0.0    ? ProbSequence::one_minus_geometric(p_c, p_a)
                                           : ProbSequence::constant_prob(p);
        ModelSpec spec;
        spec.d = d;
        spec.branchings = branch;
        spec.probs = prob;
        if (kind == "classical") spec.kind = ModelSpec::Kind::Classical;
        else if (kind == "fat") spec.kind = ModelSpec::Kind::Fat;
        else if (kind == "dense") spec.kind = ModelSpec::Kind::Dense;
        else spec.kind = ModelSpec::Kind::Thick;
        spec.validate();
        return spec;
    }
};

SurvivalTree load_tree(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return SurvivalTree::deserialize(in);
}

void save_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

MapModel map_from_flags(const std::string& name, double eps, double a, double scale) {
    MapModel map;
    if (name == "identity") map.kind = MapModel::Kind::Identity;
    else if (name == "snowflake") {
        map.kind = MapModel::Kind::Snowflake;
        map.param = eps;
    } else if (name == "power") {
        map.kind = MapModel::Kind::Power1d;
        map.param = a;
    } else {
        map.kind = MapModel::Kind::Affine;
        map.scale = scale;
    }
    return map;
}

DistortionFunction eta_from_flags(const std::string& name, double beta, double C, double eps) {
    if (name == "power") return DistortionFunction::power(beta, C);
    return DistortionFunction::snowflake(eps);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractal percolation laboratory"};
    app.set_config("--config", "", "read options from an INI file");
    app.require_subcommand(1);

    int exit_code = 0;

    // ---- generate ----------------------------------------------------------
    auto* generate_cmd = app.add_subcommand("generate", "sample a realization and store it");
    ModelFlags gen_model;
    gen_model.attach(generate_cmd);
    int gen_depth = 3;
    std::uint64_t gen_seed = 0, gen_trial = 0;
    bool gen_condition = false;
    int gen_retries = 1000;
    std::string gen_out;
    generate_cmd->add_option("--depth", gen_depth)->required();
    generate_cmd->add_option("--seed", gen_seed)->required();
    generate_cmd->add_option("--trial", gen_trial);
    generate_cmd->add_flag("--condition-nonextinct", gen_condition,
                           "reject extinct realizations");
    generate_cmd->add_option("--max-retries", gen_retries);
    generate_cmd->add_option("-o,--out", gen_out, "tree file (stdout when omitted)");
    generate_cmd->callback([&] {
        const auto spec = gen_model.build();
        SurvivalTree tree = [&] {
            if (!gen_condition) return generate(spec, gen_depth, SeedSpec{gen_seed}, {gen_trial, 0});
            auto res = condition_nonextinct(spec, gen_depth, SeedSpec{gen_seed}, gen_retries,
                                            gen_trial);
            std::cerr << "non-extinct after " << res.retries << " rejections\n";
            return std::move(res.tree);
        }();
        const std::string text = tree.serialize();
        if (gen_out.empty()) std::cout << text;
        else save_text(gen_out, text);
        std::cerr << "retained at depth " << gen_depth << ": " << tree.count(gen_depth) << "\n";
    });

    // ---- render ------------------------------------------------------------
    auto* render_cmd = app.add_subcommand("render", "rasterize a tree to a binary pixmap");
    std::string render_tree, render_out = "out.ppm";
    int render_pixels = 512;
    render_cmd->add_option("--tree", render_tree, "serialized tree file")->required();
    render_cmd->add_option("--pixels", render_pixels);
    render_cmd->add_option("-o,--out", render_out)->required();
    render_cmd->callback([&] {
        render_image(load_tree(render_tree), render_pixels, render_out);
    });

    // ---- bound -------------------------------------------------------------
    auto* bound_cmd = app.add_subcommand("bound", "subtree-probability bound report");
    std::vector<long long> bound_levels;
    long long bound_N = 0;
    int bound_count = 0;
    std::string bound_csv;
    bound_cmd->add_option("--levels", bound_levels, "explicit branching numbers")->delimiter(',');
    bound_cmd->add_option("-N,--branching", bound_N, "constant branching number");
    bound_cmd->add_option("--count", bound_count, "length of the constant sequence");
    bound_cmd->add_option("--csv", bound_csv);
    bound_cmd->callback([&] {
        std::vector<long long> levels = bound_levels;
        if (levels.empty()) {
            if (bound_N < 2 || bound_count < 1)
                throw DomainError("bound needs --levels or -N with --count");
            levels.assign(static_cast<std::size_t>(bound_count), bound_N);
        }
        const auto report = compose_bound(levels);
        std::cout << report.summary() << "\n";
        if (!bound_csv.empty()) save_text(bound_csv, report.csv());
        if (!report.all_within) exit_code = 2;
    });

    // ---- subtree -----------------------------------------------------------
    auto* subtree_cmd = app.add_subcommand("subtree", "extract a complete subtree");
    std::string subtree_tree, subtree_out;
    std::vector<int> subtree_req;
    subtree_cmd->add_option("--tree", subtree_tree)->required();
    subtree_cmd->add_option("--req", subtree_req, "minimum children per level")
        ->required()
        ->delimiter(',');
    subtree_cmd->add_option("-o,--out", subtree_out);
    subtree_cmd->callback([&] {
        const auto tree = load_tree(subtree_tree);
        const auto sub = find_subtree(tree, RequirementSequence{subtree_req});
        if (!sub) {
            std::cout << "no subtree satisfies the requirement\n";
            exit_code = 2;
            return;
        }
        std::cout << "subtree found: " << sub->count(sub->depth()) << " cubes at depth "
                  << sub->depth() << "\n";
        if (!subtree_out.empty()) save_text(subtree_out, sub->serialize());
    });

    // ---- gaps --------------------------------------------------------------
    auto* gaps_cmd = app.add_subcommand("gaps", "vertical-gap report against a delta sequence");
    std::string gaps_tree, gaps_csv;
    std::vector<double> gaps_delta;
    int gaps_from = 0;
    gaps_cmd->add_option("--tree", gaps_tree)->required();
    gaps_cmd->add_option("--delta", gaps_delta, "Δ_1,Δ_2,...")->required()->delimiter(',');
    gaps_cmd->add_option("--from-level", gaps_from);
    gaps_cmd->add_option("--csv", gaps_csv);
    gaps_cmd->callback([&] {
        const auto tree = load_tree(gaps_tree);
        const auto violations = check_dense(tree, gaps_delta, gaps_from);
        std::cout << violations.size() << " violation(s)\n";
        if (!gaps_csv.empty()) {
            std::ostringstream csv;
            csv << "address,gap,allowance\n";
            char buf[64];
            for (const auto& v : violations) {
                csv << v.node.str() << ',';
                std::snprintf(buf, sizeof buf, "%.17g", v.gap);
                csv << buf << ',';
                std::snprintf(buf, sizeof buf, "%.17g", v.allowance);
                csv << buf << '\n';
            }
            save_text(gaps_csv, csv.str());
        }
        if (!violations.empty()) exit_code = 2;
    });

    // ---- extract-dense -----------------------------------------------------
    auto* extract_cmd = app.add_subcommand("extract-dense", "run the dense-subset pipeline");
    std::string extract_tree, extract_out;
    double extract_p = 0.5;
    int extract_start = 0;
    extract_cmd->add_option("--tree", extract_tree)->required();
    extract_cmd->add_option("-p,--prob", extract_p, "retention probability of the model")
        ->required();
    extract_cmd->add_option("--start-level", extract_start);
    extract_cmd->add_option("-o,--out", extract_out);
    extract_cmd->callback([&] {
        const auto tree = load_tree(extract_tree);
        const auto got = extract_dense_subset(tree, extract_p, extract_start);
        if (!got) {
            std::cout << "no dense subset extracted\n";
            exit_code = 2;
            return;
        }
        std::cout << "extracted at " << got->root.str() << ", M =";
        for (int m : got->m_values) std::cout << ' ' << m;
        std::cout << "\n";
        if (!extract_out.empty()) save_text(extract_out, got->subtree.serialize());
    });

    // ---- qs-check ----------------------------------------------------------
    auto* qs_cmd = app.add_subcommand("qs-check", "verify a sampled map against a distortion");
    std::string qs_points, qs_map = "identity", qs_eta = "power";
    double qs_eps = 0.5, qs_a = 2.0, qs_scale = 1.0;
    double qs_beta = 1.0, qs_C = 1.0, qs_eta_eps = 0.5;
    std::uint64_t qs_seed = 0, qs_cap = 200000;
    qs_cmd->add_option("--points", qs_points, "CSV point cloud")->required();
    qs_cmd->add_option("--map", qs_map)->check(CLI::IsMember({"identity", "snowflake", "power", "affine"}));
    qs_cmd->add_option("--map-eps", qs_eps);
    qs_cmd->add_option("--map-a", qs_a);
    qs_cmd->add_option("--map-scale", qs_scale);
    qs_cmd->add_option("--eta", qs_eta)->check(CLI::IsMember({"power", "snowflake"}));
    qs_cmd->add_option("--eta-beta", qs_beta);
    qs_cmd->add_option("--eta-C", qs_C);
    qs_cmd->add_option("--eta-eps", qs_eta_eps);
    qs_cmd->add_option("--seed", qs_seed);
    qs_cmd->add_option("--cap", qs_cap);
    qs_cmd->callback([&] {
        std::ifstream in(qs_points);
        if (!in) throw Error("cannot open " + qs_points);
        PointSet pts = points_from_csv(in);
        const auto map = sampled_map(map_from_flags(qs_map, qs_eps, qs_a, qs_scale), std::move(pts));
        const auto eta = eta_from_flags(qs_eta, qs_beta, qs_C, qs_eta_eps);
        const auto report = verify_qs(map, eta, qs_seed, qs_cap);
        std::cout << report.summary() << "\n";
        for (std::size_t i = 0; i < std::min<std::size_t>(report.violations.size(), 10); ++i) {
            const auto& v = report.violations[i];
            std::cout << "violation (" << v.x << "," << v.y << "," << v.z << "): ratio "
                      << v.image_ratio << " > eta(" << v.t << ") = " << v.bound << "\n";
        }
        if (!report.violations.empty()) exit_code = 2;
    });

    // ---- frostman ----------------------------------------------------------
    auto* frost_cmd = app.add_subcommand("frostman", "build and verify a cylinder measure");
    std::string frost_tree, frost_map = "identity", frost_csv;
    double frost_eps = 0.5, frost_alpha = 1.0, frost_ceiling = 1.0;
    frost_cmd->add_option("--tree", frost_tree)->required();
    frost_cmd->add_option("--map", frost_map)->check(CLI::IsMember({"identity", "snowflake"}));
    frost_cmd->add_option("--map-eps", frost_eps);
    frost_cmd->add_option("--alpha", frost_alpha)->required();
    frost_cmd->add_option("--ceiling", frost_ceiling);
    frost_cmd->add_option("--csv", frost_csv);
    frost_cmd->callback([&] {
        const auto tree = load_tree(frost_tree);
        const auto dt = frost_map == "identity" ? image_diameters_identity(tree)
                                                : image_diameters_snowflake(tree, frost_eps);
        const auto mu = build_measure_fat(dt, frost_alpha);
        const auto result = frostman_verify(mu, dt, frost_alpha, frost_ceiling);
        std::cout << (result.pass ? "pass" : "fail") << " C*=" << result.c_star
                  << " root-ratio=" << result.root_ratio << " worst-level=" << result.worst_level
                  << "\n";
        if (result.pass) std::cout << dim_lower_bound(result, frost_alpha).text << "\n";
        if (!frost_csv.empty()) save_text(frost_csv, mu.csv(dt, frost_alpha));
        if (!result.pass) exit_code = 2;
    });

    // ---- dim ---------------------------------------------------------------
    auto* dim_cmd = app.add_subcommand("dim", "box-counting dimension estimate");
    std::string dim_tree, dim_csv;
    int dim_begin = 0, dim_len = 0;
    dim_cmd->add_option("--tree", dim_tree)->required();
    dim_cmd->add_option("--window-begin", dim_begin);
    dim_cmd->add_option("--window-len", dim_len, "0 = whole series");
    dim_cmd->add_option("--csv", dim_csv);
    dim_cmd->callback([&] {
        const auto tree = load_tree(dim_tree);
        const auto series = tree_count_series(tree);
        const std::size_t len = dim_len > 0 ? static_cast<std::size_t>(dim_len)
                                            : series.points.size() - static_cast<std::size_t>(dim_begin);
        const auto fit = estimate_dim(series, static_cast<std::size_t>(dim_begin), len);
        std::cout << fit.summary() << "\n";
        if (!dim_csv.empty()) save_text(dim_csv, series.csv());
    });

    // ---- run -----------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "one experiment: generate, analyze, persist");
    ModelFlags run_model;
    run_model.attach(run_cmd);
    int run_depth = 3, run_retries = 1000, run_pixels = 0;
    std::uint64_t run_seed = 0, run_trial = 0;
    bool run_condition = false;
    std::vector<std::string> run_analyses;
    double run_alpha = 1.9, run_qs_eps = 0.5;
    std::string run_out;
    run_cmd->add_option("--depth", run_depth)->required();
    run_cmd->add_option("--seed", run_seed)->required();
    run_cmd->add_option("--trial", run_trial);
    run_cmd->add_flag("--condition-nonextinct", run_condition);
    run_cmd->add_option("--max-retries", run_retries);
    run_cmd->add_option("--analyses", run_analyses, "subtree,gaps,frostman,dim,qs")
        ->delimiter(',')
        ->check(CLI::IsMember({"subtree", "gaps", "frostman", "dim", "qs"}));
    run_cmd->add_option("--alpha", run_alpha, "exponent for the frostman analysis");
    run_cmd->add_option("--qs-eps", run_qs_eps, "snowflake exponent for the qs analysis");
    run_cmd->add_option("--render", run_pixels, "pixmap size (0 = no image)");
    run_cmd->add_option("-o,--out", run_out, "output directory")->required();
    run_cmd->callback([&] {
        const auto spec = run_model.build();
        std::filesystem::create_directories(run_out);
        std::ostringstream record;
        record << "fraclab-record 1\n";
        record << "command: run\n";
        record << "model: " << spec.describe() << "\n";
        record << "depth: " << run_depth << "\n";
        record << "seed: " << run_seed << "\n";
        record << "trial: " << run_trial << "\n";
        record << "condition: " << (run_condition ? "nonextinct" : "none") << "\n";

        const auto t0 = std::chrono::steady_clock::now();
        SurvivalTree tree = [&] {
            if (!run_condition)
                return generate(spec, run_depth, SeedSpec{run_seed}, {run_trial, 0});
            auto res = condition_nonextinct(spec, run_depth, SeedSpec{run_seed}, run_retries,
                                            run_trial);
            record << "rejections: " << res.retries << "\n";
            return std::move(res.tree);
        }();
        save_text(run_out + "/tree.txt", tree.serialize());
        for (int level = 0; level <= run_depth; ++level)
            record << "count level " << level << ": " << tree.count(level) << "\n";
        if (run_pixels > 0) {
            render_image(tree, run_pixels, run_out + "/image.ppm");
            record << "image: image.ppm " << run_pixels << "x" << run_pixels << "\n";
        }

        bool all_ok = true;
        for (const std::string& analysis : run_analyses) {
            if (analysis == "subtree") {
                RequirementSequence req;
                for (int level = 1; level <= run_depth; ++level)
                    req.min_children.push_back(
                        static_cast<int>(tree.scales().children_per_node(level)) - 1);
                const auto sub = find_subtree(tree, req);
                record << "subtree: " << (sub ? "found" : "absent") << "\n";
                if (sub) save_text(run_out + "/subtree.txt", sub->serialize());
                all_ok = all_ok && sub.has_value();
            } else if (analysis == "gaps") {
                const double p = spec.prob_at(1);
                std::vector<double> deltas;
                for (int level = 1; level <= run_depth; ++level) {
                    const int N = tree.scales().branching(level);
                    deltas.push_back(27.0 * spec.d * overline_log(p, N) / N);
                }
                const auto violations = check_dense(tree, deltas, 0);
                record << "gaps: " << violations.size() << " violation(s)\n";
                std::ostringstream csv;
                csv << "address,gap,allowance\n";
                char buf[64];
                for (const auto& v : violations) {
                    csv << v.node.str() << ',';
                    std::snprintf(buf, sizeof buf, "%.17g", v.gap);
                    csv << buf << ',';
                    std::snprintf(buf, sizeof buf, "%.17g", v.allowance);
                    csv << buf << '\n';
                }
                save_text(run_out + "/gaps.csv", csv.str());
                all_ok = all_ok && violations.empty();
            } else if (analysis == "frostman") {
                const auto dt = image_diameters_identity(tree);
                const auto mu = build_measure_fat(dt, run_alpha);
                const auto result = frostman_verify(mu, dt, run_alpha);
                char buf[128];
                std::snprintf(buf, sizeof buf, "frostman: %s alpha=%.12g C*=%.12g\n",
                              result.pass ? "pass" : "fail", run_alpha, result.c_star);
                record << buf;
                save_text(run_out + "/measure.csv", mu.csv(dt, run_alpha));
                all_ok = all_ok && result.pass;
            } else if (analysis == "dim") {
                const auto series = tree_count_series(tree);
                const auto fit = estimate_dim(series, 0, series.points.size());
                record << "dim: " << fit.summary() << "\n";
                save_text(run_out + "/series.csv", series.csv());
            } else if (analysis == "qs") {
                const PointSet pts = points_from_tree(tree, 100, run_seed);
                const auto report = verify_qs(snowflake_map(pts, run_qs_eps),
                                              DistortionFunction::snowflake(run_qs_eps));
                record << "qs: " << report.summary() << "\n";
                all_ok = all_ok && report.violations.empty();
            }
        }
        save_text(run_out + "/record.txt", record.str());
        std::cerr << "wall-clock "
                  << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                  << " s\n";
        if (!all_ok) exit_code = 2;
    });

    // ---- mc ----------------------------------------------------------------
    auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo experiment harness");
    ModelFlags mc_model;
    mc_model.attach(mc_cmd);
    ExperimentConfig mc_config;
    std::string mc_analysis = "volume", mc_out;
    std::uint64_t mc_seed = 0;
    mc_cmd->add_option("--depth", mc_config.depth)->required();
    mc_cmd->add_option("--trials", mc_config.trials)->required();
    mc_cmd->add_option("--seed", mc_seed)->required();
    mc_cmd->add_option("--workers", mc_config.workers);
    mc_cmd->add_option("--analysis", mc_analysis)
        ->check(CLI::IsMember({"volume", "subtree", "extract-dense", "offspring"}));
    mc_cmd->add_flag("--condition-nonextinct", mc_config.condition_nonextinct);
    mc_cmd->add_option("--max-retries", mc_config.max_retries);
    mc_cmd->add_option("--offspring-level", mc_config.offspring_level);
    mc_cmd->add_option("-o,--out", mc_out, "output directory for record.txt");
    mc_cmd->callback([&] {
        mc_config.model = mc_model.build();
        mc_config.seed = SeedSpec{mc_seed};
        if (mc_analysis == "volume") mc_config.analysis = ExperimentConfig::Analysis::Volume;
        else if (mc_analysis == "subtree") mc_config.analysis = ExperimentConfig::Analysis::Subtree;
        else if (mc_analysis == "extract-dense")
            mc_config.analysis = ExperimentConfig::Analysis::ExtractDense;
        else mc_config.analysis = ExperimentConfig::Analysis::Offspring;
        const auto record = run_mc(mc_config);
        if (mc_out.empty()) {
            std::cout << record.text;
        } else {
            std::filesystem::create_directories(mc_out);
            save_text(mc_out + "/record.txt", record.text);
        }
        std::cerr << "wall-clock " << record.elapsed_seconds << " s\n";
        if (!record.verification_ok) exit_code = 2;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
