#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/rng.hpp"

namespace fraclab {

// Per-level probability sequence, 1-based: at(1) drives the first retention
// step.  Closed forms are evaluated lazily so depth is not bounded by the
// configuration length.
struct ProbSequence {
    enum class Form { Constant, Explicit, OneMinusGeometric };

    Form form = Form::Constant;
    double constant = 1.0;
    std::vector<double> values;
    double c = 0.0, a = 0.5;  // p_n = 1 - c*a^n

    static ProbSequence constant_prob(double p);
    static ProbSequence explicit_list(std::vector<double> v);
    static ProbSequence one_minus_geometric(double c, double a);

    double at(int level) const;
    std::string describe() const;
};

struct BranchSequence {
    enum class Form { Constant, Explicit, GeometricCeil };

    Form form = Form::Constant;
    int constant = 2;
    std::vector<int> values;
    double b = 2.0, r = 2.0;  // N_n = ceil(b*r^n)

    static BranchSequence constant_branch(int N);
    static BranchSequence explicit_list(std::vector<int> v);
    static BranchSequence geometric_ceil(double b, double r);

    int at(int level) const;
    std::string describe() const;
};

// Classical:  fixed N, fixed p.
// Fat:        fixed N, per-level p_n (fat percolation takes p_n -> 1).
// Dense:      growing N_n, fixed p.
// Thick:      fixed N; each cube keeps all N^d children with the level's
//             probability and none otherwise — the all-or-nothing offspring
//             law of a thick tree.
struct ModelSpec {
    enum class Kind { Classical, Fat, Dense, Thick };

    Kind kind = Kind::Classical;
    int d = 2;
    BranchSequence branchings;
    ProbSequence probs;

    static ModelSpec classical(int N, double p, int d);
    static ModelSpec fat(int N, ProbSequence probs, int d);
    static ModelSpec dense(BranchSequence Ns, double p, int d);
    static ModelSpec thick(int N, ProbSequence keep_all, int d);

    void validate() const;
    ScaleSequence scales(int depth) const;
    double prob_at(int level) const;
    // P(a level-(level-1) cube keeps all of its children), from the law
    double exact_all_retained(int level) const;
    std::string describe() const;  // stable one-line echo used in records
};

struct GenerateOptions {
    std::uint64_t trial = 0;
    std::uint64_t attempt = 0;
};

SurvivalTree generate(const ModelSpec& spec, int depth, const SeedSpec& seed,
                      const GenerateOptions& opt = {});

struct ConditionResult {
    SurvivalTree tree;
    int retries = 0;           // attempts rejected before the returned one
    std::uint64_t attempt = 0; // attempt index of the returned realization
};

// Rejection sampling of the non-extinction event (>= 1 cube at `depth`).
ConditionResult condition_nonextinct(const ModelSpec& spec, int depth, const SeedSpec& seed,
                                     int max_retries, std::uint64_t trial = 0);

// Lazy check of the same event; draws only the cubes a depth-first search
// touches.  Identical verdict to generate()+count because variates are
// address-derived.
bool survives_to_depth(const ModelSpec& spec, int depth, const SeedSpec& seed,
                       std::uint64_t trial, std::uint64_t attempt);

struct OffspringStats {
    std::uint64_t trials = 0;
    std::vector<std::uint64_t> histogram;  // histogram[k] = #trials with k children
    double mean = 0.0;
    double all_retained_frequency = 0.0;
    double ci99_half_width = 0.0;  // normal approximation
    double exact_all_retained = 0.0;
};

OffspringStats offspring_stats(const ModelSpec& spec, int level, std::uint64_t trials,
                               const SeedSpec& seed);

// Lebesgue volume of the union of retained deepest-level cubes.
double volume_estimate(const SurvivalTree& tree);

}  // namespace fraclab
