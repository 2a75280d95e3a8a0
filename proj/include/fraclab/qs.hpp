#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

// Control homeomorphism of [0,inf).  Power: C max(t^beta, t^(1/beta));
// Snowflake: t^eps; Tabulated: strictly increasing piecewise-linear table
// through (0,0), continued linearly beyond its last knot.
struct DistortionFunction {
    enum class Form { Power, Snowflake, Tabulated };

    Form form = Form::Power;
    double beta = 1.0;
    double C = 1.0;
    double eps = 1.0;
    std::vector<std::pair<double, double>> table;

    static DistortionFunction power(double beta, double C);
    static DistortionFunction snowflake(double eps);
    static DistortionFunction tabulated(std::vector<std::pair<double, double>> knots);

    double operator()(double t) const;
    std::string describe() const;
};

double eta_eval(const DistortionFunction& eta, double t);

// Finite point cloud with a distance oracle: Euclidean raised to
// snowflake_eps (1 = plain Euclidean).
struct PointSet {
    int dim = 1;
    std::vector<double> coords;  // size() * dim, row-major
    double snowflake_eps = 1.0;

    std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
    const double* point(std::size_t i) const { return coords.data() + i * static_cast<std::size_t>(dim); }
    double dist(std::size_t i, std::size_t j) const;
    void validate() const;  // metric sanity on sampled pairs
};

// Bijective index pairing between two sampled metric spaces.
struct SampledMap {
    PointSet domain;
    PointSet image;

    void validate() const;
};

// Pointwise map with an image-side metric; evaluable anywhere, used to push
// tree samples forward.
struct MapModel {
    enum class Kind { Identity, Snowflake, Power1d, Affine };

    Kind kind = Kind::Identity;
    double param = 1.0;               // snowflake eps / power exponent a
    double scale = 1.0;               // affine
    std::vector<double> shift;        // affine

    std::vector<double> apply(const std::vector<double>& x) const;
    double image_eps() const { return kind == Kind::Snowflake ? param : 1.0; }
    std::string describe() const;
};

SampledMap sampled_map(const MapModel& model, PointSet points);

// builtins
SampledMap identity_map(PointSet points);
SampledMap snowflake_map(PointSet points, double eps);
SampledMap power_map_1d(std::vector<double> xs, double a);
SampledMap affine_map(PointSet points, double scale, std::vector<double> shift);

// Nominal distortion function of x -> x^a on [0,1]; the constant is pinned
// by an exhaustive grid search in the test suite.
DistortionFunction nominal_eta_power_map(double a);

struct QsViolation {
    std::size_t x = 0, y = 0, z = 0;
    double t = 0.0;            // d(x,y)/d(x,z)
    double image_ratio = 0.0;  // rho(fx,fy)/rho(fx,fz)
    double bound = 0.0;        // eta(t)
};

struct QsReport {
    std::vector<QsViolation> violations;
    std::uint64_t triples_checked = 0;
    bool sampled = false;           // true when the triple cap forced sampling
    double min_equality_gap = 0.0;  // min over triples of |ratio-eta|/max(eta, eps)
    double worst_excess = 0.0;      // max of ratio/eta

    std::string summary() const;
};

// Exhaustive check over ordered triples of distinct sample points (seeded
// subsample above `triple_cap`).  An empty violation list is consistency
// with eta-quasisymmetry on the sample; a violation certifies the map is not
// an eta-quasisymmetry.
QsReport verify_qs(const SampledMap& map, const DistortionFunction& eta,
                   std::uint64_t seed = 0, std::uint64_t triple_cap = 200000,
                   double rel_tol = 1e-9);

enum class Lemma { BoundedDistortion, BoundedDistortionDist, BoundedDistortionVariant };

struct LemmaCheck {
    Lemma lemma{};
    bool applicable = false;
    bool satisfied = false;
    double lhs = 0.0;
    double lower = 0.0;  // lower bound (first lemma only)
    double upper = 0.0;
    double slack = 0.0;  // upper - lhs
};

struct LemmaReport {
    std::vector<LemmaCheck> checks;
    // the variant's intermediate bound 1 + eta((|A|+|B|+dist)/|A|)
    double chain_intermediate = 0.0;
    bool all_satisfied = true;
};

// Evaluates the three bounded-distortion inequalities on sample diameters
// and distances.  Diameters of infinite sets are approximated from below by
// sample diameters, so these are one-sided certificates: a violation rules
// out eta-quasisymmetry, a pass does not prove it.
// `required`: lemmas whose preconditions the caller vouches for; a breach
// raises PreconditionError naming the lemma.
LemmaReport lemma_bounds_check(const SampledMap& map, const DistortionFunction& eta,
                               const std::vector<std::size_t>& A, const std::vector<std::size_t>& B,
                               const std::vector<Lemma>& required = {});

// Point sources: deterministic samples from a survival tree (deepest-level
// cube centers and corners), and CSV (index, x_1..x_d per line).
PointSet points_from_tree(const SurvivalTree& tree, std::size_t count, std::uint64_t seed);
PointSet points_from_csv(std::istream& in);
void points_to_csv(const PointSet& points, std::ostream& out);

}  // namespace fraclab
