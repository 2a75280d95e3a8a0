#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/percolation.hpp"

namespace fraclab {

// Per-level minimum child counts: min_children[k-1] applies to the nodes of
// level k-1 (their children live at level k).  Zero is allowed; it makes the
// requirement vacuous at that level.
struct RequirementSequence {
    std::vector<int> min_children;

    int at(int child_level) const;
    static RequirementSequence uniform(int m, int depth);
};

// One step of the subtree-probability recursion for a branching factor N:
//   g(s) = 1 - (1-s)^N - N s (1-s)^(N-1) + N^-5,
// an upper bound on the probability that a node of an (1-N^-6)-thick tree
// has at most N-2 children whose own subtrees succeed, when each child
// fails independently with probability at most s.
double g_eval(long long N, double s);

// Tail compositions t_k = g_k ∘ … ∘ g_n (0), evaluated inside-out, with the
// per-level induction ceilings 4 N_k^-5.
struct BoundReport {
    struct Row {
        int level = 0;          // 1-based position in `levels`
        long long N = 0;
        double tail_value = 0;  // g_level ∘ … ∘ g_n (0)
        double ceiling = 0;     // 4 N^-5
        bool within = false;
    };

    std::vector<Row> rows;
    double q = 0.0;   // bound on P(no complete subtree to the horizon)
    double p0 = 0.0;  // 1 - q
    bool all_within = false;

    std::string csv() const;
    std::string summary() const;
};

BoundReport compose_bound(const std::vector<long long>& levels, int start = 0);

struct TaylorCheck {
    struct Point {
        double s = 0, lhs = 0, rhs = 0;
        bool pass = false;
    };
    std::vector<Point> points;
    bool all_pass = false;
};

// Checks g(s) <= N^-5 + 2 N^3 s^2 on a grid of s in [0, 1/(2N)).
TaylorCheck taylor_bound_check(long long N, const std::vector<double>& s_grid);

// Bottom-up viability pruning: a depth-horizon node is viable, an internal
// level-k node is viable iff it has at least req.at(k+1) viable children.
// On success, extracts the subtree keeping exactly req.at(k+1)
// lexicographically smallest viable children per node.
std::optional<SurvivalTree> find_subtree(const SurvivalTree& tree, const RequirementSequence& req);

struct ContainmentReport {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double frequency = 0.0;
    double ci99_half_width = 0.0;
    double p0 = 0.0;                  // compose_bound over the per-level child counts
    std::vector<int> flagged_levels;  // levels whose law misses the thickness hypothesis

    std::string summary() const;
};

// Frequency at which realizations contain a complete subtree with the
// requirement N_k^d - 1 at every level.
ContainmentReport containment_mc(const ModelSpec& spec, int depth, std::uint64_t trials,
                                 const SeedSpec& seed, int workers = 1);

}  // namespace fraclab
