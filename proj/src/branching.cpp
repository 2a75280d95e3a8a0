#include "fraclab/branching.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "fraclab/mc.hpp"

namespace fraclab {

int RequirementSequence::at(int child_level) const {
    if (child_level < 1 || static_cast<std::size_t>(child_level) > min_children.size())
        throw PreconditionError("requirement sequence not defined at level " +
                                std::to_string(child_level));
    return min_children[static_cast<std::size_t>(child_level) - 1];
}

RequirementSequence RequirementSequence::uniform(int m, int depth) {
    return {std::vector<int>(static_cast<std::size_t>(depth), m)};
}

double g_eval(long long N, double s) {
    if (N < 2) throw DomainError("g_eval requires N >= 2");
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("g_eval requires s in [0,1]");
    const double Nd = static_cast<double>(N);
    const double one_minus = 1.0 - s;
    const double pow_nm1 = std::pow(one_minus, Nd - 1.0);
    return 1.0 - pow_nm1 * one_minus - Nd * s * pow_nm1 + std::pow(Nd, -5.0);
}

BoundReport compose_bound(const std::vector<long long>& levels, int start) {
    if (start < 0 || static_cast<std::size_t>(start) >= levels.size())
        throw DomainError("compose_bound: start out of range");
    BoundReport report;
    const int n = static_cast<int>(levels.size());
    report.rows.resize(static_cast<std::size_t>(n - start));
    double s = 0.0;
    for (int k = n - 1; k >= start; --k) {
        const long long N = levels[static_cast<std::size_t>(k)];
        s = g_eval(N, s);
        auto& row = report.rows[static_cast<std::size_t>(k - start)];
        row.level = k + 1;
        row.N = N;
        row.tail_value = s;
        row.ceiling = 4.0 * std::pow(static_cast<double>(N), -5.0);
        row.within = s <= row.ceiling;
    }
    report.q = s;
    report.p0 = 1.0 - s;
    report.all_within = true;
    for (const auto& row : report.rows) report.all_within = report.all_within && row.within;
    return report;
}

std::string BoundReport::csv() const {
    std::ostringstream out;
    out << "level,N,tail_value,ceiling,within\n";
    char buf[64];
    for (const auto& row : rows) {
        out << row.level << ',' << row.N << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.tail_value);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.ceiling);
        out << buf << ',' << (row.within ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string BoundReport::summary() const {
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", q);
    out << "q = " << buf;
    std::snprintf(buf, sizeof buf, "%.12g", p0);
    out << ", p0 = " << buf << ", levels = " << rows.size()
        << ", per-level ceilings " << (all_within ? "respected" : "VIOLATED");
    return out.str();
}

TaylorCheck taylor_bound_check(long long N, const std::vector<double>& s_grid) {
    if (N < 2) throw DomainError("taylor_bound_check requires N >= 2");
    TaylorCheck check;
    check.points.reserve(s_grid.size());
    check.all_pass = true;
    const double Nd = static_cast<double>(N);
    const double limit = 1.0 / (2.0 * Nd);
    for (double s : s_grid) {
        if (!(s >= 0.0 && s < limit))
            throw DomainError("taylor_bound_check: grid point outside [0, 1/(2N))");
        TaylorCheck::Point pt;
        pt.s = s;
        pt.lhs = g_eval(N, s);
        pt.rhs = std::pow(Nd, -5.0) + 2.0 * Nd * Nd * Nd * s * s;
        pt.pass = pt.lhs <= pt.rhs;
        check.all_pass = check.all_pass && pt.pass;
        check.points.push_back(pt);
    }
    return check;
}

std::optional<SurvivalTree> find_subtree(const SurvivalTree& tree, const RequirementSequence& req) {
    const int depth = tree.depth();
    if (static_cast<int>(req.min_children.size()) < depth)
        throw PreconditionError("requirement sequence shorter than tree depth");

    // viable[k][i] for nodes of level k
    std::vector<std::vector<char>> viable(static_cast<std::size_t>(depth) + 1);
    viable[static_cast<std::size_t>(depth)].assign(tree.count(depth), 1);
    for (int level = depth - 1; level >= 0; --level) {
        const int need = req.at(level + 1);
        auto& cur = viable[static_cast<std::size_t>(level)];
        const auto& below = viable[static_cast<std::size_t>(level) + 1];
        cur.assign(tree.count(level), 0);
        for (std::size_t i = 0; i < cur.size(); ++i) {
            auto [b, e] = tree.children(level, i);
            int have = 0;
            for (std::size_t c = b; c < e && have < need; ++c)
                if (below[c]) ++have;
            cur[i] = have >= need;
        }
    }
    if (!viable[0][0]) return std::nullopt;

    SurvivalTree out(tree.scales());
    std::vector<std::size_t> kept{0};  // node indices of the current level in `tree`
    for (int level = 0; level < depth; ++level) {
        const int take = req.at(level + 1);
        const auto& below = viable[static_cast<std::size_t>(level) + 1];
        std::vector<SurvivalTree::Entry> entries;
        std::vector<std::size_t> next;
        for (std::size_t newp = 0; newp < kept.size(); ++newp) {
            auto [b, e] = tree.children(level, kept[newp]);
            int taken = 0;
            for (std::size_t c = b; c < e && taken < take; ++c) {
                if (!below[c]) continue;
                entries.push_back({static_cast<std::uint32_t>(newp), tree.entry(level + 1, c).digit});
                next.push_back(c);
                ++taken;
            }
        }
        out.push_level(std::move(entries));
        kept = std::move(next);
    }
    return out;
}

std::string ContainmentReport::summary() const {
    std::ostringstream out;
    char buf[64];
    out << "trials=" << trials << " successes=" << successes;
    std::snprintf(buf, sizeof buf, "%.6f", frequency);
    out << " frequency=" << buf;
    std::snprintf(buf, sizeof buf, "%.6f", ci99_half_width);
    out << " ci99=" << buf;
    std::snprintf(buf, sizeof buf, "%.9f", p0);
    out << " p0=" << buf;
    if (!flagged_levels.empty()) {
        out << " thickness-warning-levels=";
        for (std::size_t i = 0; i < flagged_levels.size(); ++i)
            out << (i ? "," : "") << flagged_levels[i];
    }
    return out.str();
}

ContainmentReport containment_mc(const ModelSpec& spec, int depth, std::uint64_t trials,
                                 const SeedSpec& seed, int workers) {
    if (trials < 1) throw DomainError("trials must be >= 1");
    ContainmentReport report;
    report.trials = trials;

    const ScaleSequence scales = spec.scales(depth);
    std::vector<long long> child_counts;
    RequirementSequence req;
    for (int level = 1; level <= depth; ++level) {
        const auto n = scales.children_per_node(level);
        child_counts.push_back(static_cast<long long>(n));
        req.min_children.push_back(static_cast<int>(n) - 1);
        // eq-np-admissible is a property of the law, not of samples
        const double hypothesis = 1.0 - std::pow(static_cast<double>(n), -6.0);
        if (spec.exact_all_retained(level) < hypothesis) report.flagged_levels.push_back(level);
    }
    report.p0 = compose_bound(child_counts).p0;

    std::vector<char> success(trials, 0);
    parallel_trials(trials, workers, [&](std::uint64_t t) {
        const SurvivalTree tree = generate(spec, depth, seed, {t, 0});
        success[t] = find_subtree(tree, req).has_value();
    });
    for (char s : success) report.successes += s != 0;
    report.frequency = static_cast<double>(report.successes) / static_cast<double>(trials);
    const double f = report.frequency;
    report.ci99_half_width =
        2.5758293035489004 * std::sqrt(f * (1.0 - f) / static_cast<double>(trials));
    return report;
}

}  // namespace fraclab
