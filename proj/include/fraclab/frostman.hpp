#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/qs.hpp"

namespace fraclab {

// Survival tree annotated with image diameters |f(Q)|.  The caller keeps the
// tree alive for the lifetime of the annotation.
struct DiameterTree {
    enum class Provenance { Identity, Snowflake, Sampled, PointCloud };

    const SurvivalTree* tree = nullptr;
    std::vector<std::vector<double>> diam;  // diam[level][node]
    Provenance provenance = Provenance::Identity;
    int samples_per_cube = 0;
    std::vector<std::pair<int, std::size_t>> flagged;  // nodes that used the fallback

    double at(int level, std::size_t i) const { return diam[static_cast<std::size_t>(level)][i]; }
};

// Exact diameters of the retained-leaf unions under the identity map,
// computed from bounding boxes of integer leaf corners.  Exact whenever the
// extreme corners of each cube survive (interior removal rules); otherwise
// an upper bound no larger than the cube diagonal.
DiameterTree image_diameters_identity(const SurvivalTree& tree);

// Identity diameters raised to eps (the snowflake metric transform).
DiameterTree image_diameters_snowflake(const SurvivalTree& tree, double eps);

// Generic maps: per-cube seeded samples on retained leaves, diameter = max
// pairwise image distance.  Sample streams are prefix-stable, so diameters
// are non-decreasing in samples_per_cube.
DiameterTree image_diameters(const SurvivalTree& tree, const MapModel& map, int samples_per_cube,
                             std::uint64_t seed);

// Finite point-cloud maps: diameter over the cloud points lying in each
// cube.  Cubes with fewer than two points fall back to parent diameter
// divided by the subdivision factor and are flagged.
DiameterTree image_diameters(const SurvivalTree& tree, const SampledMap& cloud);

// Mass assignment on the retained cubes; children sum to their parent.
struct CylinderMeasure {
    const SurvivalTree* tree = nullptr;
    std::vector<std::vector<double>> mass;

    double at(int level, std::size_t i) const { return mass[static_cast<std::size_t>(level)][i]; }
    std::string csv(const DiameterTree& dt, double alpha) const;
};

struct SubadditivityReport {
    struct Row {
        int level = 0;
        std::size_t node = 0;
        double ratio = 0.0;  // sum of children |f(Q)|^alpha over the node's own
        bool pass = false;
    };
    std::vector<Row> rows;
    double worst_ratio = 0.0;
    bool all_pass = false;
};

// Checks |f(Q0)|^alpha <= sum over children of |f(Q)|^alpha at every
// internal node.
SubadditivityReport subadditivity_check(const DiameterTree& dt, double alpha);

struct ChainBoundReport {
    struct Row {
        int level = 0;
        std::size_t node = 0;
        std::uint64_t column = 0;
        double lhs = 0.0;  // |f(Q0)|
        double rhs = 0.0;  // 16 eta(2) * column sum of |f(Q)|
        bool pass = false;
    };
    std::vector<Row> rows;
    bool all_pass = false;
};

// Per-column chain bound |f(Q0)| <= 16 eta(2) sum_{Q in column} |f(Q)|.
ChainBoundReport chain_bound_check(const DiameterTree& dt, const DistortionFunction& eta);

// Proportional-to-|f(Q)|^alpha mass splitting among siblings, root mass 1.
CylinderMeasure build_measure_fat(const DiameterTree& dt, double alpha);

struct FrostmanResult {
    bool pass = false;
    double c_star = 0.0;      // max over nodes of mass / |f(Q)|^alpha
    double root_ratio = 0.0;  // the same ratio at the root
    double ceiling = 1.0;     // allowed multiple of the root ratio
    int worst_level = 0;
    std::size_t worst_node = 0;
    double alpha = 0.0;
    int depth = 0;
};

// Frostman verification.  The inequality mass(Q) <= C |f(Q)|^alpha is
// scale-covariant: rescaling the image metric multiplies every ratio by the
// same factor, so the verdict compares C* against the root's own ratio
// (pass iff C* <= ceiling * root ratio).  Reported ratios stay raw.
// Single-regime checks use ceiling 1; the two-regime dense scheme only
// promises a finite constant, conventionally checked with ceiling 1e3.
FrostmanResult frostman_verify(const CylinderMeasure& mu, const DiameterTree& dt, double alpha,
                               double ceiling = 1.0);

struct DimensionCertificate {
    double alpha = 0.0;
    double constant = 0.0;  // C* relative to the root ratio
    int depth = 0;
    std::string text;
};

// Mass-distribution certificate at the sampled resolution; requires a
// passing verification.
DimensionCertificate dim_lower_bound(const FrostmanResult& result, double alpha);

// ---- dense two-regime scheme -------------------------------------------

// k_n with N_n = 2^{k_n}; throws DomainError when a factor is not a power
// of two.
std::vector<int> dyadic_exponents(const ScaleSequence& scales);

// Inserts the intermediate dyadic levels between construction scales; a
// dyadic cube is retained iff it contains a retained construction cube.
SurvivalTree dyadic_refine(const SurvivalTree& tree);

struct DenseMeasureParams {
    double alpha = 0.0;
    double t = 0.0;
    double beta = 1.0;
    double gamma = 0.0;

    // gamma must lie in (t/(t+(t-alpha) beta^2), 1)
    void validate(int d) const;
    double gamma_window_low() const { return t / (t + (t - alpha) * beta * beta); }
};

struct DenseMeasureResult {
    CylinderMeasure measure;
    std::vector<int> assigned_levels;   // dyadic levels that received a direct split
    std::vector<int> boundary_flags;    // bands whose cut landed on an integer
};

// Exponent-t proportional splitting on the large-scale bands
// (S_l, S_l + gamma k_{l+1}), then a single split jumping to S_{l+1};
// skipped levels get their mass by restriction.
DenseMeasureResult build_measure_dense(const DiameterTree& dyadic_dt,
                                       const DenseMeasureParams& params,
                                       const std::vector<int>& k_exponents, int n0 = 0);

struct SkipScaleFit {
    double K = 0.0;               // fitted constant in |f(Q)| <= K N^(-gamma beta) |f(root)|
    std::vector<double> band_K;   // per band
    std::uint64_t nodes_checked = 0;
};

// Report-only numerical check of the skip-scale diameter decay used by the
// power-quasisymmetry argument.
SkipScaleFit skip_scale_check(const DiameterTree& dyadic_dt, const std::vector<int>& k_exponents,
                              int n0, double gamma, double beta);

}  // namespace fraclab
