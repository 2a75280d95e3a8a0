#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/percolation.hpp"

namespace fraclab {

// Deterministic fat Cantor construction: one construction step divides each
// cube into N^{md} subcubes (N^m per axis) and removes exactly one of them.
struct FatCantorSpec {
    enum class Removal { FixedIndex, Seeded, Callback };

    int N = 2;
    int m = 1;
    int d = 2;
    Removal removal = Removal::FixedIndex;
    std::vector<int> fixed_index;  // digit tuple in the N^m-per-axis grid; default all-ones
    std::uint64_t removal_seed = 0;
    std::function<std::uint32_t(const CubeAddress& parent)> chooser;

    int block() const;  // N^m, the per-axis subdivision of one step
    void validate() const;
};

// One tree level per construction step: level-k cubes have side (N^m)^-k.
SurvivalTree build_fat_cantor(const FatCantorSpec& spec, int depth);

// Dense Cantor construction: caller chooses the retained children of every
// cube; check_dense decides afterwards whether the result is (Δ_n)_n-dense.
struct DenseCantorSpec {
    ScaleSequence scales;
    std::vector<double> deltas;  // Δ_n, 1-based; empty means log(N_n)/N_n
    std::function<std::vector<std::uint32_t>(const CubeAddress& parent, int N, int d)> chooser;

    double delta_at(int level) const;
};

SurvivalTree build_dense_cantor(const DenseCantorSpec& spec, int depth);

// Longest run of missing child cells in one column, over all N^(d-1)
// columns of the node's child grid ("vertical" = last coordinate axis).
int max_vertical_gap_cells(const SurvivalTree& tree, int level, std::size_t node);

// The same gap in absolute units: cells x child side length.  Exact for
// unions of grid cubes, since any vertical segment avoiding the retained
// children lies in a single column.
double max_vertical_gap(const SurvivalTree& tree, int level, std::size_t node);
double max_vertical_gap(const SurvivalTree& tree, const CubeAddress& node);

struct GapViolation {
    CubeAddress node;
    int level = 0;
    double gap = 0.0;        // absolute units
    double allowance = 0.0;  // Δ_{level+1} |Q|, with |Q| the Euclidean diameter
};

// Empty result iff every node from `from_level` on satisfies
// gap(Q) <= Δ_{n+1} |Q|; deltas[k-1] holds Δ_k.
std::vector<GapViolation> check_dense(const SurvivalTree& tree, const std::vector<double>& deltas,
                                      int from_level);

// Logarithm in base 1/(1-p).
double overline_log(double p, double x);

struct DenseExtraction {
    SurvivalTree subtree;               // rooted at the cube where extraction succeeded
    CubeAddress root;                   // that cube's address in the input tree
    std::vector<int> m_values;          // trimmed family size M_k per child level
    std::vector<double> achieved_delta; // max relative vertical gap per child level
};

// The probabilistic-proof pipeline run deterministically on one realization:
// (a) discard nodes whose children leave a vertical gap above
//     6d log_{1/(1-p)}(N_k)/N_k |Q|, (b) trim every surviving family to the
//     constant size M_k while keeping gaps within the same bound with 13 in
//     place of 6, (c) search the trimmed tree for a subtree with M_k - 1
//     children everywhere, (d) report the achieved gaps (the closing bound
//     allows 27d log_{1/(1-p)}(N_k)/N_k |Q|).
std::optional<DenseExtraction> extract_dense_subset(const SurvivalTree& tree, double p,
                                                    int start_level);

// M_k = ceil(N^{d-1} N / (6 d log_{1/(1-p)} N)), the lower end of the
// trimming window.
int dense_trim_size(int N, int d, double p);

struct DenseMcReport {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double frequency = 0.0;
    double ci99_half_width = 0.0;
    std::vector<int> m_values;
    double p0 = 0.0;     // compose_bound over the M_k (0 when some M_k < 2)
    double sigma = 0.0;  // sqrt(p0 (1-p0) / trials)

    std::string summary() const;
};

// Monte Carlo of the pipeline event on non-extinct realizations.  Evaluates
// the event lazily: per-cube variates are address-derived, so the verdict is
// identical to materializing the tree and calling extract_dense_subset, but
// only the families the decision depends on are ever drawn.
DenseMcReport extract_dense_mc(const ModelSpec& spec, int depth, std::uint64_t trials,
                               const SeedSpec& seed, int max_retries, int workers = 1);

namespace detail {

// shared by the eager pipeline, the lazy pipeline and the tests
int max_gap_cells(const std::vector<std::uint32_t>& sorted_child_linears, int N, int d);
bool gap_within(const std::vector<std::uint32_t>& sorted_child_linears, int N, int d, double coef);
// removes down to exactly `keep` cubes: repeatedly take the column with the
// most retained cubes (lexicographic tie-break), then keep the survivors of
// each column evenly spaced by index
std::vector<std::uint32_t> trim_select(const std::vector<std::uint32_t>& sorted_child_linears,
                                       int N, int d, int keep);
std::vector<int> leveled_column_counts(std::vector<int> counts, int keep_total);

}  // namespace detail

}  // namespace fraclab
