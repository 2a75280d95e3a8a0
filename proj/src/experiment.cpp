#include "fraclab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "fraclab/branching.hpp"
#include "fraclab/cantor.hpp"
#include "fraclab/mc.hpp"

namespace fraclab {

void ExperimentConfig::validate() const {
    model.validate();
    if (depth < 1) throw DomainError("depth must be >= 1");
    if (trials < 1) throw DomainError("trials must be >= 1");
    if (workers < 1) throw DomainError("workers must be >= 1");
    // every referenced sequence must be defined to the requested depth
    (void)model.scales(depth);
    for (int level = 1; level <= depth; ++level) (void)model.prob_at(level);
}

namespace {

const char* analysis_name(ExperimentConfig::Analysis a) {
    switch (a) {
        case ExperimentConfig::Analysis::Volume: return "volume";
        case ExperimentConfig::Analysis::Subtree: return "subtree";
        case ExperimentConfig::Analysis::ExtractDense: return "extract-dense";
        case ExperimentConfig::Analysis::Offspring: return "offspring";
    }
    return "?";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ExperimentRecord run_mc(const ExperimentConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();

    std::ostringstream head;
    head << "fraclab-record 1\n";
    head << "command: mc\n";
    head << "model: " << config.model.describe() << "\n";
    head << "depth: " << config.depth << "\n";
    head << "trials: " << config.trials << "\n";
    head << "seed: " << config.seed.base_seed << "\n";
    // the dense extraction pipeline always conditions on non-extinction
    const bool conditioned = config.condition_nonextinct ||
                             config.analysis == ExperimentConfig::Analysis::ExtractDense;
    head << "condition: " << (conditioned ? "nonextinct" : "none") << "\n";
    head << "analysis: " << analysis_name(config.analysis) << "\n";

    ExperimentRecord record;
    std::ostringstream body;
    std::ostringstream tail;

    switch (config.analysis) {
        case ExperimentConfig::Analysis::Volume: {
            std::vector<double> volume(config.trials, 0.0);
            std::vector<int> retries(config.trials, 0);
            parallel_trials(config.trials, config.workers, [&](std::uint64_t t) {
                if (config.condition_nonextinct) {
                    const auto res = condition_nonextinct(config.model, config.depth, config.seed,
                                                          config.max_retries, t);
                    volume[t] = volume_estimate(res.tree);
                    retries[t] = res.retries;
                } else {
                    volume[t] = volume_estimate(generate(config.model, config.depth, config.seed,
                                                         {t, 0}));
                }
            });
            double sum = 0.0;
            for (std::uint64_t t = 0; t < config.trials; ++t) {
                body << "trial " << t << " volume " << fmt(volume[t]);
                if (config.condition_nonextinct) body << " retries " << retries[t];
                body << "\n";
                sum += volume[t];
            }
            tail << "mean-volume " << fmt(sum / static_cast<double>(config.trials)) << "\n";
            break;
        }
        case ExperimentConfig::Analysis::Subtree: {
            const ScaleSequence scales = config.model.scales(config.depth);
            RequirementSequence req;
            std::vector<long long> counts;
            for (int level = 1; level <= config.depth; ++level) {
                const auto n = scales.children_per_node(level);
                req.min_children.push_back(static_cast<int>(n) - 1);
                counts.push_back(static_cast<long long>(n));
            }
            std::vector<char> success(config.trials, 0);
            std::vector<int> retries(config.trials, 0);
            parallel_trials(config.trials, config.workers, [&](std::uint64_t t) {
                SurvivalTree tree = [&] {
                    if (!config.condition_nonextinct)
                        return generate(config.model, config.depth, config.seed, {t, 0});
                    auto res = condition_nonextinct(config.model, config.depth, config.seed,
                                                    config.max_retries, t);
                    retries[t] = res.retries;
                    return std::move(res.tree);
                }();
                success[t] = find_subtree(tree, req).has_value();
            });
            std::uint64_t ok = 0;
            for (std::uint64_t t = 0; t < config.trials; ++t) {
                body << "trial " << t << " success " << int{success[t]};
                if (config.condition_nonextinct) body << " retries " << retries[t];
                body << "\n";
                ok += success[t] != 0;
            }
            const double freq = static_cast<double>(ok) / static_cast<double>(config.trials);
            tail << "successes " << ok << "\n";
            tail << "frequency " << fmt(freq) << "\n";
            tail << "p0 " << fmt(compose_bound(counts).p0) << "\n";
            break;
        }
        case ExperimentConfig::Analysis::ExtractDense: {
            const auto report = extract_dense_mc(config.model, config.depth, config.trials,
                                                 config.seed, config.max_retries, config.workers);
            tail << "successes " << report.successes << "\n";
            tail << "frequency " << fmt(report.frequency) << "\n";
            tail << "p0 " << fmt(report.p0) << "\n";
            tail << "sigma " << fmt(report.sigma) << "\n";
            tail << "M";
            for (int m : report.m_values) tail << ' ' << m;
            tail << "\n";
            record.verification_ok = report.p0 == 0.0 ||
                                     report.frequency >= report.p0 - 3.0 * report.sigma;
            break;
        }
        case ExperimentConfig::Analysis::Offspring: {
            const auto st = offspring_stats(config.model, config.offspring_level, config.trials,
                                            config.seed);
            tail << "level " << config.offspring_level << "\n";
            tail << "mean-children " << fmt(st.mean) << "\n";
            tail << "all-retained-frequency " << fmt(st.all_retained_frequency) << "\n";
            tail << "all-retained-exact " << fmt(st.exact_all_retained) << "\n";
            tail << "ci99-half-width " << fmt(st.ci99_half_width) << "\n";
            break;
        }
    }

    record.text = head.str() + body.str() + tail.str();
    record.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record;
}

}  // namespace fraclab
