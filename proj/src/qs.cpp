#include "fraclab/qs.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fraclab/rng.hpp"

namespace fraclab {

DistortionFunction DistortionFunction::power(double beta, double C) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("power distortion requires beta in (0,1]");
    if (!(C > 0.0)) throw DomainError("power distortion requires C > 0");
    DistortionFunction eta;
    eta.form = Form::Power;
    eta.beta = beta;
    eta.C = C;
    return eta;
}

DistortionFunction DistortionFunction::snowflake(double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("snowflake requires eps in (0,1]");
    DistortionFunction eta;
    eta.form = Form::Snowflake;
    eta.eps = eps;
    return eta;
}

DistortionFunction DistortionFunction::tabulated(std::vector<std::pair<double, double>> knots) {
    if (knots.empty() || knots.front() != std::pair<double, double>{0.0, 0.0})
        throw DomainError("tabulated distortion must start at (0,0)");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i].first > knots[i - 1].first && knots[i].second > knots[i - 1].second))
            throw DomainError("tabulated distortion must be strictly increasing");
    DistortionFunction eta;
    eta.form = Form::Tabulated;
    eta.table = std::move(knots);
    return eta;
}

double DistortionFunction::operator()(double t) const {
    if (t < 0.0) throw DomainError("distortion functions are defined on [0,inf)");
    switch (form) {
        case Form::Power:
            return C * std::max(std::pow(t, beta), std::pow(t, 1.0 / beta));
        case Form::Snowflake:
            return std::pow(t, eps);
        case Form::Tabulated: {
            if (table.size() == 1) return t;  // degenerate table, identity continuation
            std::size_t hi = 1;
            while (hi + 1 < table.size() && table[hi].first < t) ++hi;
            const auto [x0, y0] = table[hi - 1];
            const auto [x1, y1] = table[hi];
            // beyond the last knot this extrapolates the final segment
            return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
        }
    }
    throw Error("unreachable");
}

double eta_eval(const DistortionFunction& eta, double t) { return eta(t); }

std::string DistortionFunction::describe() const {
    std::ostringstream out;
    char buf[64];
    switch (form) {
        case Form::Power:
            std::snprintf(buf, sizeof buf, "%.17g", C);
            out << "power C=" << buf;
            std::snprintf(buf, sizeof buf, "%.17g", beta);
            out << " beta=" << buf;
            break;
        case Form::Snowflake:
            std::snprintf(buf, sizeof buf, "%.17g", eps);
            out << "snowflake eps=" << buf;
            break;
        case Form::Tabulated:
            out << "tabulated knots=" << table.size() << " (linear continuation beyond the table)";
            break;
    }
    return out.str();
}

double PointSet::dist(std::size_t i, std::size_t j) const {
    const double* a = point(i);
    const double* b = point(j);
    double s = 0.0;
    for (int axis = 0; axis < dim; ++axis) {
        const double diff = a[axis] - b[axis];
        s += diff * diff;
    }
    const double euclid = std::sqrt(s);
    return snowflake_eps == 1.0 ? euclid : std::pow(euclid, snowflake_eps);
}

void PointSet::validate() const {
    if (dim < 1) throw DomainError("point set dimension must be >= 1");
    if (coords.size() % static_cast<std::size_t>(dim) != 0)
        throw DomainError("coordinate array not a multiple of the dimension");
    if (!(snowflake_eps > 0.0 && snowflake_eps <= 1.0))
        throw DomainError("snowflake exponent must lie in (0,1]");
    const std::size_t n = size();
    // distances: symmetric, non-negative, zero iff same index (sampled)
    const std::size_t pairs = std::min<std::size_t>(n * n, 4096);
    for (std::size_t k = 0; k < pairs; ++k) {
        const std::size_t i = mix64(0xC0FFEE, 2 * k) % n;
        const std::size_t j = mix64(0xC0FFEE, 2 * k + 1) % n;
        const double dij = dist(i, j);
        if (dij < 0.0) throw DomainError("negative distance");
        if (i != j && dij == 0.0) throw DomainError("duplicate points in sample");
        if (i == j && dij != 0.0) throw DomainError("nonzero self distance");
    }
}

void SampledMap::validate() const {
    domain.validate();
    image.validate();
    if (domain.size() != image.size()) throw PreconditionError("map pairing is not bijective");
}

std::vector<double> MapModel::apply(const std::vector<double>& x) const {
    switch (kind) {
        case Kind::Identity:
        case Kind::Snowflake:
            return x;
        case Kind::Power1d: {
            if (x.size() != 1) throw UnsupportedDimension("power map is one-dimensional");
            return {std::pow(x[0], param)};
        }
        case Kind::Affine: {
            std::vector<double> y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i)
                y[i] = scale * x[i] + (i < shift.size() ? shift[i] : 0.0);
            return y;
        }
    }
    throw Error("unreachable");
}

std::string MapModel::describe() const {
    char buf[64];
    switch (kind) {
        case Kind::Identity: return "identity";
        case Kind::Snowflake:
            std::snprintf(buf, sizeof buf, "snowflake eps=%.17g", param);
            return buf;
        case Kind::Power1d:
            std::snprintf(buf, sizeof buf, "power a=%.17g", param);
            return buf;
        case Kind::Affine:
            std::snprintf(buf, sizeof buf, "affine scale=%.17g", scale);
            return buf;
    }
    return "?";
}

SampledMap sampled_map(const MapModel& model, PointSet points) {
    SampledMap map;
    map.image.dim = model.kind == MapModel::Kind::Power1d ? 1 : points.dim;
    map.image.snowflake_eps = model.image_eps();
    map.image.coords.reserve(points.coords.size());
    std::vector<double> x(static_cast<std::size_t>(points.dim));
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::copy(points.point(i), points.point(i) + points.dim, x.begin());
        for (double v : model.apply(x)) map.image.coords.push_back(v);
    }
    map.domain = std::move(points);
    map.validate();
    return map;
}

SampledMap identity_map(PointSet points) { return sampled_map(MapModel{}, std::move(points)); }

SampledMap snowflake_map(PointSet points, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("snowflake requires eps in (0,1]");
    MapModel model;
    model.kind = MapModel::Kind::Snowflake;
    model.param = eps;
    return sampled_map(model, std::move(points));
}

SampledMap power_map_1d(std::vector<double> xs, double a) {
    if (!(a > 0.0)) throw DomainError("power map requires a > 0");
    PointSet pts;
    pts.dim = 1;
    pts.coords = std::move(xs);
    MapModel model;
    model.kind = MapModel::Kind::Power1d;
    model.param = a;
    return sampled_map(model, std::move(pts));
}

SampledMap affine_map(PointSet points, double scale, std::vector<double> shift) {
    if (scale == 0.0) throw DomainError("affine map must be invertible");
    MapModel model;
    model.kind = MapModel::Kind::Affine;
    model.scale = scale;
    model.shift = std::move(shift);
    return sampled_map(model, std::move(points));
}

DistortionFunction nominal_eta_power_map(double a) {
    if (a < 1.0) a = 1.0 / a;
    // sharp at (x, 2x, 0); validated by exhaustive grid search in the tests
    const double C = std::pow(2.0, a) - 1.0;
    return DistortionFunction::power(1.0 / a, C);
}

std::string QsReport::summary() const {
    std::ostringstream out;
    out << "triples=" << triples_checked << (sampled ? " (sampled)" : "")
        << " violations=" << violations.size();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", min_equality_gap);
    out << " min-equality-gap=" << buf;
    std::snprintf(buf, sizeof buf, "%.6f", worst_excess);
    out << " worst-ratio/eta=" << buf;
    return out.str();
}

QsReport verify_qs(const SampledMap& map, const DistortionFunction& eta, std::uint64_t seed,
                   std::uint64_t triple_cap, double rel_tol) {
    map.validate();
    const std::size_t n = map.domain.size();
    if (n < 3) throw PreconditionError("verify_qs needs at least 3 points");

    QsReport report;
    report.min_equality_gap = std::numeric_limits<double>::infinity();

    auto check_triple = [&](std::size_t x, std::size_t y, std::size_t z) {
        const double dxz = map.domain.dist(x, z);
        const double rxz = map.image.dist(x, z);
        if (dxz == 0.0 || rxz == 0.0) return;  // excluded by the sample invariant
        const double t = map.domain.dist(x, y) / dxz;
        const double ratio = map.image.dist(x, y) / rxz;
        const double bound = eta(t);
        ++report.triples_checked;
        const double gap = std::abs(ratio - bound) / std::max(bound, 1e-300);
        report.min_equality_gap = std::min(report.min_equality_gap, gap);
        if (bound > 0.0) report.worst_excess = std::max(report.worst_excess, ratio / bound);
        if (ratio > bound * (1.0 + rel_tol)) report.violations.push_back({x, y, z, t, ratio, bound});
    };

    const std::uint64_t total =
        static_cast<std::uint64_t>(n) * (n - 1) * (n - 2);
    if (total <= triple_cap) {
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y)
                for (std::size_t z = 0; z < n; ++z)
                    if (x != y && y != z && x != z) check_triple(x, y, z);
    } else {
        report.sampled = true;
        std::uint64_t drawn = 0, counter = 0;
        while (drawn < triple_cap) {
            const std::uint64_t h = mix64(seed, counter++);
            const std::size_t x = static_cast<std::size_t>(h % n);
            const std::size_t y = static_cast<std::size_t>((h >> 21) % n);
            const std::size_t z = static_cast<std::size_t>((h >> 42) % n);
            if (x == y || y == z || x == z) continue;
            check_triple(x, y, z);
            ++drawn;
        }
    }
    return report;
}

namespace {

double set_diameter(const PointSet& pts, const std::vector<std::size_t>& idx) {
    double diam = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = i + 1; j < idx.size(); ++j)
            diam = std::max(diam, pts.dist(idx[i], idx[j]));
    return diam;
}

double set_distance(const PointSet& pts, const std::vector<std::size_t>& a,
                    const std::vector<std::size_t>& b) {
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i : a)
        for (std::size_t j : b) dist = std::min(dist, pts.dist(i, j));
    return dist;
}

bool is_subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    for (std::size_t i : a)
        if (std::find(b.begin(), b.end(), i) == b.end()) return false;
    return true;
}

}  // namespace

LemmaReport lemma_bounds_check(const SampledMap& map, const DistortionFunction& eta,
                               const std::vector<std::size_t>& A, const std::vector<std::size_t>& B,
                               const std::vector<Lemma>& required) {
    if (A.empty() || B.empty()) throw PreconditionError("lemma checks need non-empty sets");
    std::vector<std::size_t> uni = A;
    uni.insert(uni.end(), B.begin(), B.end());
    std::sort(uni.begin(), uni.end());
    uni.erase(std::unique(uni.begin(), uni.end()), uni.end());

    const double dA = set_diameter(map.domain, A);
    const double dB = set_diameter(map.domain, B);
    const double dU = set_diameter(map.domain, uni);
    const double gap = set_distance(map.domain, A, B);
    const double fA = set_diameter(map.image, A);
    const double fB = set_diameter(map.image, B);
    const double fU = set_diameter(map.image, uni);
    const double fgap = set_distance(map.image, A, B);

    LemmaReport report;
    auto requires_lemma = [&](Lemma which) {
        return std::find(required.begin(), required.end(), which) != required.end();
    };

    {  // |f(A)|/|f(B)| sandwich, needs A ⊆ B with |A| > 0
        LemmaCheck check;
        check.lemma = Lemma::BoundedDistortion;
        check.applicable = is_subset(A, B) && dA > 0.0;
        if (!check.applicable && requires_lemma(check.lemma))
            throw PreconditionError("bounded-distortion lemma requires A ⊆ B and |A| > 0");
        if (check.applicable && fB > 0.0) {
            check.lhs = fA / fB;
            check.lower = 0.5 / eta(dB / dA);
            check.upper = eta(2.0 * dA / dB);
            check.satisfied = check.lower <= check.lhs && check.lhs <= check.upper;
            check.slack = std::min(check.lhs - check.lower, check.upper - check.lhs);
            report.checks.push_back(check);
        } else if (check.applicable) {
            check.satisfied = true;  // degenerate image
            report.checks.push_back(check);
        }
    }
    {  // relative gap of the images, no precondition
        LemmaCheck check;
        check.lemma = Lemma::BoundedDistortionDist;
        check.applicable = true;
        if (fU > 0.0 && dU > 0.0) {
            check.lhs = fgap / fU;
            check.upper = eta(2.0 * gap / dU);
            check.satisfied = check.lhs <= check.upper;
            check.slack = check.upper - check.lhs;
        } else {
            check.satisfied = true;
        }
        report.checks.push_back(check);
    }
    {  // variant for |B| <= |A|
        LemmaCheck check;
        check.lemma = Lemma::BoundedDistortionVariant;
        check.applicable = dB <= dA && dA > 0.0;
        if (!check.applicable && requires_lemma(check.lemma))
            throw PreconditionError("bounded-distortion variant requires |B| <= |A|, both non-empty");
        if (check.applicable && fA > 0.0) {
            check.lhs = fgap / fA;
            check.upper = 1.0 + eta(2.0 + gap / dA);
            check.satisfied = check.lhs <= check.upper;
            check.slack = check.upper - check.lhs;
            report.chain_intermediate = 1.0 + eta((dA + dB + gap) / dA);
            report.checks.push_back(check);
        } else if (check.applicable) {
            check.satisfied = true;
            report.checks.push_back(check);
        }
    }
    for (const auto& check : report.checks)
        report.all_satisfied = report.all_satisfied && check.satisfied;
    return report;
}

PointSet points_from_tree(const SurvivalTree& tree, std::size_t count, std::uint64_t seed) {
    const int depth = tree.depth();
    const std::size_t leaves = tree.count(depth);
    if (leaves == 0) throw PreconditionError("tree has no retained deepest-level cubes");
    PointSet pts;
    pts.dim = tree.dim();
    const auto d = static_cast<std::size_t>(tree.dim());
    const double den = static_cast<double>(tree.scales().side_denominator(depth));
    const std::uint64_t corners = 1ull << tree.dim();

    auto already_have = [&](const std::vector<double>& candidate) {
        for (std::size_t j = 0; j * d < pts.coords.size(); ++j) {
            bool same = true;
            for (std::size_t axis = 0; axis < d && same; ++axis)
                same = pts.coords[j * d + axis] == candidate[axis];
            if (same) return true;
        }
        return false;
    };

    // evenly spaced leaves, alternating the centre and a seeded corner;
    // duplicates from shared corners are skipped and replaced
    std::vector<double> candidate(d);
    for (std::uint64_t k = 0; pts.size() < count && k < 8 * count + 64; ++k) {
        const std::size_t leaf = static_cast<std::size_t>((2 * k + 1) * leaves / (2 * count)) % leaves;
        const Box box = tree.box_of(depth, leaf);
        const bool centre = k % 2 == 0;
        const std::uint64_t corner = mix64(seed ^ kSaltSample, k) % corners;
        for (std::size_t axis = 0; axis < d; ++axis) {
            const double lo = static_cast<double>(box.corner_num[axis]) / den;
            candidate[axis] = centre ? lo + 0.5 / den : (((corner >> axis) & 1u) ? lo + 1.0 / den : lo);
        }
        if (!already_have(candidate))
            pts.coords.insert(pts.coords.end(), candidate.begin(), candidate.end());
    }
    return pts;
}

PointSet points_from_csv(std::istream& in) {
    PointSet pts;
    pts.dim = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 2) throw Error("points CSV rows are: index, x_1, ..., x_d");
        if (pts.dim == 0) pts.dim = static_cast<int>(row.size()) - 1;
        if (static_cast<int>(row.size()) - 1 != pts.dim) throw Error("ragged points CSV");
        for (std::size_t i = 1; i < row.size(); ++i) pts.coords.push_back(row[i]);
    }
    if (pts.dim == 0) throw Error("empty points CSV");
    return pts;
}

void points_to_csv(const PointSet& points, std::ostream& out) {
    char buf[64];
    for (std::size_t i = 0; i < points.size(); ++i) {
        out << i;
        for (int axis = 0; axis < points.dim; ++axis) {
            std::snprintf(buf, sizeof buf, "%.17g", points.point(i)[axis]);
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace fraclab
