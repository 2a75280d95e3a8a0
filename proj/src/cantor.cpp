#include "fraclab/cantor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fraclab/branching.hpp"
#include "fraclab/mc.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

int FatCantorSpec::block() const {
    std::int64_t b = 1;
    for (int i = 0; i < m; ++i) {
        b *= N;
        if (b > 1 << 20) throw DomainError("fat Cantor block too large");
    }
    return static_cast<int>(b);
}

void FatCantorSpec::validate() const {
    if (N < 2) throw DomainError("fat Cantor requires N >= 2");
    if (m < 1) throw DomainError("fat Cantor requires m >= 1");
    if (d < 1) throw DomainError("fat Cantor requires d >= 1");
    if (removal == Removal::Callback && !chooser)
        throw PreconditionError("fat Cantor callback removal without a chooser");
}

SurvivalTree build_fat_cantor(const FatCantorSpec& spec, int depth) {
    spec.validate();
    if (depth < 1) throw DomainError("depth must be >= 1");
    const int B = spec.block();
    std::uint64_t per_node = 1;
    for (int axis = 0; axis < spec.d; ++axis) per_node *= static_cast<std::uint64_t>(B);

    std::uint32_t fixed_linear = 0;
    if (spec.removal == FatCantorSpec::Removal::FixedIndex) {
        std::vector<int> tuple = spec.fixed_index;
        if (tuple.empty()) tuple.assign(static_cast<std::size_t>(spec.d), std::min(1, B - 1));
        fixed_linear = digit_tuple_to_linear(tuple, B);
    }

    ScaleSequence scales{spec.d, std::vector<int>(static_cast<std::size_t>(depth), B)};
    SurvivalTree tree(scales);
    std::vector<std::uint64_t> states{mix64(spec.removal_seed)};
    for (int level = 1; level <= depth; ++level) {
        const std::size_t parents = tree.count(level - 1);
        std::vector<SurvivalTree::Entry> entries;
        entries.reserve(parents * (per_node - 1));
        std::vector<std::uint64_t> next_states;
        if (spec.removal == FatCantorSpec::Removal::Seeded)
            next_states.reserve(parents * (per_node - 1));
        for (std::size_t parent = 0; parent < parents; ++parent) {
            std::uint32_t removed = fixed_linear;
            if (spec.removal == FatCantorSpec::Removal::Seeded)
                removed = static_cast<std::uint32_t>(mix64(states[parent] ^ kSaltRemoval) % per_node);
            else if (spec.removal == FatCantorSpec::Removal::Callback)
                removed = spec.chooser(tree.address_of(level - 1, parent));
            if (removed >= per_node) throw InvalidAddress("removal index out of range");
            for (std::uint32_t cdx = 0; cdx < per_node; ++cdx) {
                if (cdx == removed) continue;
                entries.push_back({static_cast<std::uint32_t>(parent), cdx});
                if (spec.removal == FatCantorSpec::Removal::Seeded)
                    next_states.push_back(child_state(states[parent], cdx));
            }
        }
        tree.push_level(std::move(entries));
        states = std::move(next_states);
    }
    return tree;
}

double DenseCantorSpec::delta_at(int level) const {
    if (level < 1) throw DomainError("delta levels are 1-based");
    if (!deltas.empty()) {
        if (static_cast<std::size_t>(level) > deltas.size())
            throw InsufficientSequence("delta sequence shorter than requested level");
        return deltas[static_cast<std::size_t>(level) - 1];
    }
    const double N = static_cast<double>(scales.branching(level));
    return std::log(N) / N;
}

SurvivalTree build_dense_cantor(const DenseCantorSpec& spec, int depth) {
    spec.scales.validate();
    if (!spec.chooser) throw PreconditionError("dense Cantor build requires a chooser");
    if (depth > spec.scales.max_depth()) throw ScaleError("depth exceeds configured scales");
    SurvivalTree tree(spec.scales);
    for (int level = 1; level <= depth; ++level) {
        const int N = spec.scales.branching(level);
        const auto per_node = spec.scales.children_per_node(level);
        std::vector<SurvivalTree::Entry> entries;
        for (std::size_t parent = 0; parent < tree.count(level - 1); ++parent) {
            auto kids = spec.chooser(tree.address_of(level - 1, parent), N, spec.scales.d);
            std::sort(kids.begin(), kids.end());
            kids.erase(std::unique(kids.begin(), kids.end()), kids.end());
            for (auto cdx : kids) {
                if (cdx >= per_node) throw InvalidAddress("chooser digit out of range");
                entries.push_back({static_cast<std::uint32_t>(parent), cdx});
            }
        }
        tree.push_level(std::move(entries));
    }
    return tree;
}

namespace detail {

int max_gap_cells(const std::vector<std::uint32_t>& sorted_child_linears, int N, int d) {
    std::uint64_t columns = 1;
    for (int i = 0; i < d - 1; ++i) columns *= static_cast<std::uint64_t>(N);

    int worst = 0;
    std::uint64_t columns_seen = 0;
    std::size_t i = 0;
    const auto n = static_cast<std::uint32_t>(N);
    while (i < sorted_child_linears.size()) {
        const std::uint32_t col = sorted_child_linears[i] / n;
        ++columns_seen;
        int prev_end = 0;
        for (; i < sorted_child_linears.size() && sorted_child_linears[i] / n == col; ++i) {
            const int z = static_cast<int>(sorted_child_linears[i] % n);
            worst = std::max(worst, z - prev_end);
            prev_end = z + 1;
        }
        worst = std::max(worst, N - prev_end);
    }
    if (columns_seen < columns) worst = N;  // some column is entirely missing
    return worst;
}

bool gap_within(const std::vector<std::uint32_t>& sorted_child_linears, int N, int d, double coef) {
    // gap length = cells * side/N, allowance = coef * |Q| = coef * sqrt(d) * side
    const int cells = max_gap_cells(sorted_child_linears, N, d);
    return static_cast<double>(cells) <= coef * std::sqrt(static_cast<double>(d)) * N;
}

std::vector<int> leveled_column_counts(std::vector<int> counts, int keep_total) {
    // Outcome of repeatedly decrementing the currently largest count with a
    // lexicographic tie-break, computed in closed form: cap all counts at a
    // level theta, then push the lexicographically first `extra` columns
    // sitting at theta one below.
    std::int64_t total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
    std::int64_t remove = total - keep_total;
    if (remove < 0) throw PreconditionError("leveled_column_counts: nothing to remove");
    if (remove == 0) return counts;

    int lo = 0, hi = *std::max_element(counts.begin(), counts.end());
    // smallest theta with sum(max(c - theta, 0)) <= remove
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        std::int64_t s = 0;
        for (int c : counts) s += std::max(c - mid, 0);
        if (s <= remove) hi = mid; else lo = mid + 1;
    }
    const int theta = lo;
    std::int64_t used = 0;
    for (int& c : counts) {
        used += std::max(c - theta, 0);
        c = std::min(c, theta);
    }
    std::int64_t extra = remove - used;
    for (int& c : counts) {
        if (extra == 0) break;
        if (c == theta && theta > 0) {
            --c;
            --extra;
        }
    }
    if (extra != 0) throw Error("leveled_column_counts: leveling failed");
    return counts;
}

std::vector<std::uint32_t> trim_select(const std::vector<std::uint32_t>& sorted_child_linears,
                                       int N, int d, int keep) {
    if (keep < 0 || static_cast<std::size_t>(keep) > sorted_child_linears.size())
        throw PreconditionError("trim_select: keep out of range");
    std::uint64_t columns = 1;
    for (int i = 0; i < d - 1; ++i) columns *= static_cast<std::uint64_t>(N);

    const auto n = static_cast<std::uint32_t>(N);
    std::vector<int> counts(columns, 0);
    for (auto lin : sorted_child_linears) ++counts[lin / n];
    const auto kept_counts = leveled_column_counts(counts, keep);

    std::vector<std::uint32_t> kept;
    kept.reserve(static_cast<std::size_t>(keep));
    std::size_t i = 0;
    for (std::uint64_t col = 0; col < columns; ++col) {
        const int have = counts[col];
        const int want = kept_counts[col];
        // positions of this column's cubes are consecutive in the sorted input
        if (want > 0) {
            for (int t = 0; t < want; ++t) {
                const auto pick = static_cast<std::size_t>(
                    (static_cast<std::int64_t>(2 * t + 1) * have) / (2 * want));
                kept.push_back(sorted_child_linears[i + pick]);
            }
        }
        i += static_cast<std::size_t>(have);
    }
    return kept;
}

}  // namespace detail

int max_vertical_gap_cells(const SurvivalTree& tree, int level, std::size_t node) {
    if (level >= tree.depth()) throw MissingLevel("node has no populated child level");
    const int N = tree.scales().branching(level + 1);
    auto [b, e] = tree.children(level, node);
    std::vector<std::uint32_t> kids;
    kids.reserve(e - b);
    for (std::size_t c = b; c < e; ++c) kids.push_back(tree.entry(level + 1, c).digit);
    return detail::max_gap_cells(kids, N, tree.dim());
}

double max_vertical_gap(const SurvivalTree& tree, int level, std::size_t node) {
    const int cells = max_vertical_gap_cells(tree, level, node);
    const double child_side = 1.0 / static_cast<double>(tree.scales().side_denominator(level + 1));
    return static_cast<double>(cells) * child_side;
}

double max_vertical_gap(const SurvivalTree& tree, const CubeAddress& node) {
    const auto idx = tree.find(node);
    if (!idx) throw InvalidAddress("node not retained: " + node.str());
    return max_vertical_gap(tree, node.level(), *idx);
}

std::vector<GapViolation> check_dense(const SurvivalTree& tree, const std::vector<double>& deltas,
                                      int from_level) {
    if (from_level < 0) throw DomainError("from_level must be >= 0");
    std::vector<GapViolation> out;
    const double sqrt_d = std::sqrt(static_cast<double>(tree.dim()));
    for (int level = from_level; level < tree.depth(); ++level) {
        if (static_cast<std::size_t>(level) >= deltas.size())
            throw InsufficientSequence("delta sequence shorter than tree depth");
        const double delta = deltas[static_cast<std::size_t>(level)];  // Δ_{level+1}
        const double side = 1.0 / static_cast<double>(tree.scales().side_denominator(level));
        const double allowance = delta * sqrt_d * side;
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            const double gap = max_vertical_gap(tree, level, i);
            if (gap > allowance)
                out.push_back({tree.address_of(level, i), level, gap, allowance});
        }
    }
    return out;
}

double overline_log(double p, double x) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("overline_log requires p in (0,1)");
    if (!(x > 0.0)) throw DomainError("overline_log requires x > 0");
    return std::log(x) / std::log(1.0 / (1.0 - p));
}

int dense_trim_size(int N, int d, double p) {
    const double lower = std::pow(static_cast<double>(N), d - 1) * static_cast<double>(N) /
                         (6.0 * d * overline_log(p, static_cast<double>(N)));
    return static_cast<int>(std::ceil(lower));
}

namespace {

struct PipelinePlan {
    std::vector<int> n_values;   // N_k for child levels start+1..depth
    std::vector<int> m_values;   // M_k for the same levels
    std::vector<double> coef6;   // 6d loḡ(N_k)/N_k
    std::vector<double> coef13;
};

PipelinePlan plan_pipeline(const ScaleSequence& scales, double p, int start_level, int depth) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("pipeline requires p in (0,1)");
    if (start_level < 0 || start_level >= depth)
        throw PreconditionError("start_level must lie above the tree depth");
    PipelinePlan plan;
    for (int k = start_level + 1; k <= depth; ++k) {
        const int N = scales.branching(k);
        const int M = dense_trim_size(N, scales.d, p);
        if (!plan.m_values.empty() && M < plan.m_values.back())
            throw PreconditionError("trim sizes M_k are not non-decreasing from this start level");
        plan.n_values.push_back(N);
        plan.m_values.push_back(M);
        const double c = 6.0 * scales.d * overline_log(p, N) / static_cast<double>(N);
        plan.coef6.push_back(c);
        plan.coef13.push_back(c * 13.0 / 6.0);
    }
    return plan;
}

}  // namespace

std::optional<DenseExtraction> extract_dense_subset(const SurvivalTree& tree, double p,
                                                    int start_level) {
    const int depth = tree.depth();
    const PipelinePlan plan = plan_pipeline(tree.scales(), p, start_level, depth);
    const int d = tree.dim();
    const int span = depth - start_level;

    // (a)+(b): per node, does the gap test pass and what survives trimming
    std::vector<std::vector<char>> node_ok(static_cast<std::size_t>(span));
    std::vector<std::vector<std::vector<std::uint32_t>>> node_kept(static_cast<std::size_t>(span));
    for (int level = start_level; level < depth; ++level) {
        const int rel = level - start_level;
        const int N = plan.n_values[static_cast<std::size_t>(rel)];
        const int M = plan.m_values[static_cast<std::size_t>(rel)];
        auto& ok = node_ok[static_cast<std::size_t>(rel)];
        auto& kept = node_kept[static_cast<std::size_t>(rel)];
        ok.assign(tree.count(level), 0);
        kept.resize(tree.count(level));
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            auto [b, e] = tree.children(level, i);
            std::vector<std::uint32_t> family;
            family.reserve(e - b);
            for (std::size_t c = b; c < e; ++c) family.push_back(tree.entry(level + 1, c).digit);
            if (!detail::gap_within(family, N, d, plan.coef6[static_cast<std::size_t>(rel)]))
                continue;
            if (static_cast<int>(family.size()) < M) continue;
            auto sel = detail::trim_select(family, N, d, M);
            if (!detail::gap_within(sel, N, d, plan.coef13[static_cast<std::size_t>(rel)])) continue;
            ok[i] = 1;
            kept[i] = std::move(sel);
        }
    }

    // (c): bottom-up viability over trimmed families
    std::vector<std::vector<char>> viable(static_cast<std::size_t>(span) + 1);
    viable[static_cast<std::size_t>(span)].assign(tree.count(depth), 1);
    for (int level = depth - 1; level >= start_level; --level) {
        const int rel = level - start_level;
        const int M = plan.m_values[static_cast<std::size_t>(rel)];
        auto& cur = viable[static_cast<std::size_t>(rel)];
        const auto& below = viable[static_cast<std::size_t>(rel) + 1];
        cur.assign(tree.count(level), 0);
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            if (!node_ok[static_cast<std::size_t>(rel)][i]) continue;
            auto [b, e] = tree.children(level, i);
            int good = 0;
            std::size_t c = b;  // kept digits and children are both sorted
            for (std::uint32_t digit : node_kept[static_cast<std::size_t>(rel)][i]) {
                while (c < e && tree.entry(level + 1, c).digit < digit) ++c;
                if (c < e && tree.entry(level + 1, c).digit == digit && below[c]) ++good;
            }
            cur[i] = good >= M - 1;
        }
    }

    // first viable start-level cube in lexicographic order wins
    std::size_t root_idx = tree.count(start_level);
    for (std::size_t i = 0; i < tree.count(start_level); ++i)
        if (viable[0][i]) {
            root_idx = i;
            break;
        }
    if (root_idx == tree.count(start_level)) return std::nullopt;

    DenseExtraction out;
    out.root = tree.address_of(start_level, root_idx);
    out.m_values = plan.m_values;
    out.achieved_delta.assign(static_cast<std::size_t>(span), 0.0);

    ScaleSequence sub_scales{d, {}};
    for (int k = start_level + 1; k <= depth; ++k)
        sub_scales.levels.push_back(tree.scales().branching(k));
    SurvivalTree sub(sub_scales);
    std::vector<std::size_t> frontier{root_idx};
    const double sqrt_d = std::sqrt(static_cast<double>(d));
    for (int level = start_level; level < depth; ++level) {
        const int rel = level - start_level;
        const int N = plan.n_values[static_cast<std::size_t>(rel)];
        const int take = plan.m_values[static_cast<std::size_t>(rel)] - 1;
        const auto& below = viable[static_cast<std::size_t>(rel) + 1];
        std::vector<SurvivalTree::Entry> entries;
        std::vector<std::size_t> next;
        for (std::size_t newp = 0; newp < frontier.size(); ++newp) {
            const std::size_t i = frontier[newp];
            auto [b, e] = tree.children(level, i);
            // node_kept is sorted, so entries stay in (parent, digit) order
            std::vector<std::uint32_t> chosen;
            std::size_t c = b;
            for (std::uint32_t digit : node_kept[static_cast<std::size_t>(rel)][i]) {
                if (static_cast<int>(chosen.size()) >= take) break;
                while (c < e && tree.entry(level + 1, c).digit < digit) ++c;
                if (c < e && tree.entry(level + 1, c).digit == digit && below[c]) {
                    chosen.push_back(digit);
                    next.push_back(c);
                    entries.push_back({static_cast<std::uint32_t>(newp), digit});
                }
            }
            const int cells = detail::max_gap_cells(chosen, N, d);
            out.achieved_delta[static_cast<std::size_t>(rel)] =
                std::max(out.achieved_delta[static_cast<std::size_t>(rel)],
                         static_cast<double>(cells) / (static_cast<double>(N) * sqrt_d));
        }
        sub.push_level(std::move(entries));
        frontier = std::move(next);
    }
    out.subtree = std::move(sub);
    return out;
}

std::string DenseMcReport::summary() const {
    std::ostringstream out;
    char buf[64];
    out << "trials=" << trials << " successes=" << successes;
    std::snprintf(buf, sizeof buf, "%.6f", frequency);
    out << " frequency=" << buf;
    std::snprintf(buf, sizeof buf, "%.9f", p0);
    out << " p0=" << buf;
    std::snprintf(buf, sizeof buf, "%.6f", sigma);
    out << " sigma=" << buf << " M=[";
    for (std::size_t i = 0; i < m_values.size(); ++i) out << (i ? "," : "") << m_values[i];
    out << "]";
    return out.str();
}

namespace {

// Lazy pipeline viability: draws a node's family on demand; identical verdict
// to the eager pipeline because variates are pure functions of the address.
bool lazy_viable(const ModelSpec& spec, const PipelinePlan& plan, int depth, int level,
                 std::uint64_t state, double p) {
    if (level == depth) return true;
    const int rel = level;  // lazy mode runs with start_level = 0
    const int N = plan.n_values[static_cast<std::size_t>(rel)];
    const int M = plan.m_values[static_cast<std::size_t>(rel)];
    const int d = spec.d;
    std::uint64_t per_node = 1;
    for (int axis = 0; axis < d; ++axis) per_node *= static_cast<std::uint64_t>(N);

    std::vector<std::uint32_t> family;
    for (std::uint32_t cdx = 0; cdx < per_node; ++cdx)
        if (retain_uniform(child_state(state, cdx)) < p) family.push_back(cdx);

    if (!detail::gap_within(family, N, d, plan.coef6[static_cast<std::size_t>(rel)])) return false;
    if (static_cast<int>(family.size()) < M) return false;
    const auto kept = detail::trim_select(family, N, d, M);
    if (!detail::gap_within(kept, N, d, plan.coef13[static_cast<std::size_t>(rel)])) return false;

    int good = 0, bad = 0;
    for (std::uint32_t digit : kept) {
        if (lazy_viable(spec, plan, depth, level + 1, child_state(state, digit), p))
            ++good;
        else if (++bad >= 2)
            return false;  // needs M-1 of M
    }
    return good >= M - 1;
}

}  // namespace

DenseMcReport extract_dense_mc(const ModelSpec& spec, int depth, std::uint64_t trials,
                               const SeedSpec& seed, int max_retries, int workers) {
    if (spec.kind != ModelSpec::Kind::Dense && spec.kind != ModelSpec::Kind::Classical)
        throw PreconditionError("extract_dense_mc expects a per-child Bernoulli model");
    if (trials < 1) throw DomainError("trials must be >= 1");
    const double p = spec.prob_at(1);
    const PipelinePlan plan = plan_pipeline(spec.scales(depth), p, 0, depth);

    DenseMcReport report;
    report.trials = trials;
    report.m_values = plan.m_values;
    bool composable = true;
    for (int m : plan.m_values) composable = composable && m >= 2;
    if (composable) {
        std::vector<long long> ms(plan.m_values.begin(), plan.m_values.end());
        report.p0 = compose_bound(ms).p0;
    }
    report.sigma = std::sqrt(report.p0 * (1.0 - report.p0) / static_cast<double>(trials));

    std::vector<char> success(trials, 0);
    std::atomic<bool> retries_exhausted{false};
    parallel_trials(trials, workers, [&](std::uint64_t t) {
        std::uint64_t attempt = 0;
        for (;; ++attempt) {
            if (attempt >= static_cast<std::uint64_t>(max_retries)) {
                retries_exhausted = true;  // cannot throw across the worker pool
                return;
            }
            if (survives_to_depth(spec, depth, seed, t, attempt)) break;
        }
        const std::uint64_t root = seed.trial_state(t, attempt);
        success[t] = lazy_viable(spec, plan, depth, 0, root, p);
    });
    if (retries_exhausted)
        throw NonExtinctionFailed("lazy pipeline: no non-extinct realization within max_retries");
    for (char s : success) report.successes += s != 0;
    report.frequency = static_cast<double>(report.successes) / static_cast<double>(trials);
    const double f = report.frequency;
    report.ci99_half_width =
        2.5758293035489004 * std::sqrt(f * (1.0 - f) / static_cast<double>(trials));
    return report;
}

}  // namespace fraclab
