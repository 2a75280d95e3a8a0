#include "fraclab/frostman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fraclab/rng.hpp"

namespace fraclab {

namespace {

// integer corner coordinates of every node, level by level
std::vector<std::vector<std::int64_t>> corners_by_level(const SurvivalTree& tree) {
    const int depth = tree.depth();
    const int d = tree.dim();
    std::vector<std::vector<std::int64_t>> corners(static_cast<std::size_t>(depth) + 1);
    corners[0].assign(static_cast<std::size_t>(d), 0);
    for (int level = 1; level <= depth; ++level) {
        const int N = tree.scales().branching(level);
        auto& cur = corners[static_cast<std::size_t>(level)];
        const auto& up = corners[static_cast<std::size_t>(level) - 1];
        cur.resize(tree.count(level) * static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            const auto& e = tree.entry(level, i);
            const auto tuple = linear_to_digit_tuple(e.digit, N, d);
            for (int axis = 0; axis < d; ++axis)
                cur[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis)] =
                    up[e.parent * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis)] * N +
                    tuple[static_cast<std::size_t>(axis)];
        }
    }
    return corners;
}

}  // namespace

DiameterTree image_diameters_identity(const SurvivalTree& tree) {
    const int depth = tree.depth();
    const int d = tree.dim();
    const auto corners = corners_by_level(tree);
    const std::int64_t deep_den = tree.scales().side_denominator(depth);

    DiameterTree dt;
    dt.tree = &tree;
    dt.provenance = DiameterTree::Provenance::Identity;
    dt.diam.resize(static_cast<std::size_t>(depth) + 1);

    // bounding boxes of the retained-leaf unions, in units of the deepest grid
    std::vector<std::vector<std::int64_t>> lo(static_cast<std::size_t>(depth) + 1);
    std::vector<std::vector<std::int64_t>> hi(static_cast<std::size_t>(depth) + 1);
    for (int level = depth; level >= 0; --level) {
        const std::size_t n = tree.count(level);
        const std::int64_t ratio = deep_den / tree.scales().side_denominator(level);
        auto& l = lo[static_cast<std::size_t>(level)];
        auto& h = hi[static_cast<std::size_t>(level)];
        l.resize(n * static_cast<std::size_t>(d));
        h.resize(n * static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < n; ++i) {
            const bool leaf = level == depth || tree.child_count(level, i) == 0;
            for (int axis = 0; axis < d; ++axis) {
                const std::size_t at = i * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis);
                if (leaf) {
                    l[at] = corners[static_cast<std::size_t>(level)][at] * ratio;
                    h[at] = l[at] + ratio;
                } else {
                    auto [b, e] = tree.children(level, i);
                    std::int64_t mn = std::numeric_limits<std::int64_t>::max();
                    std::int64_t mx = std::numeric_limits<std::int64_t>::min();
                    for (std::size_t c = b; c < e; ++c) {
                        const std::size_t cat =
                            c * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis);
                        mn = std::min(mn, lo[static_cast<std::size_t>(level) + 1][cat]);
                        mx = std::max(mx, hi[static_cast<std::size_t>(level) + 1][cat]);
                    }
                    l[at] = mn;
                    h[at] = mx;
                }
            }
        }
        auto& dm = dt.diam[static_cast<std::size_t>(level)];
        dm.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (int axis = 0; axis < d; ++axis) {
                const std::size_t at = i * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis);
                const double side = static_cast<double>(h[at] - l[at]);
                s += side * side;
            }
            dm[i] = std::sqrt(s) / static_cast<double>(deep_den);
        }
    }
    return dt;
}

DiameterTree image_diameters_snowflake(const SurvivalTree& tree, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("snowflake requires eps in (0,1]");
    DiameterTree dt = image_diameters_identity(tree);
    dt.provenance = DiameterTree::Provenance::Snowflake;
    for (auto& level : dt.diam)
        for (double& v : level) v = std::pow(v, eps);
    return dt;
}

DiameterTree image_diameters(const SurvivalTree& tree, const MapModel& map, int samples_per_cube,
                             std::uint64_t seed) {
    if (samples_per_cube < 2) throw PreconditionError("need at least two samples per cube");
    if (map.kind == MapModel::Kind::Identity) {
        DiameterTree dt = image_diameters_identity(tree);
        dt.provenance = DiameterTree::Provenance::Identity;
        return dt;
    }
    if (map.kind == MapModel::Kind::Snowflake) return image_diameters_snowflake(tree, map.param);

    const int depth = tree.depth();
    const int d = tree.dim();
    const auto corners = corners_by_level(tree);

    DiameterTree dt;
    dt.tree = &tree;
    dt.provenance = DiameterTree::Provenance::Sampled;
    dt.samples_per_cube = samples_per_cube;
    dt.diam.resize(static_cast<std::size_t>(depth) + 1);

    std::vector<double> x(static_cast<std::size_t>(d));
    for (int level = 0; level <= depth; ++level) {
        auto& dm = dt.diam[static_cast<std::size_t>(level)];
        dm.resize(tree.count(level));
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            // seeded descent to a retained leaf, then one of its corners
            std::vector<std::vector<double>> pts;
            for (int j = 0; j < samples_per_cube; ++j) {
                std::uint64_t state = mix64(mix64(seed ^ kSaltSample, mix64(level, i)), j);
                int cur_level = level;
                std::size_t cur = i;
                while (cur_level < depth && tree.child_count(cur_level, cur) > 0) {
                    auto [b, e] = tree.children(cur_level, cur);
                    cur = b + static_cast<std::size_t>(state % (e - b));
                    state = mix64(state, 0x57A1Eull);
                    ++cur_level;
                }
                const double den =
                    static_cast<double>(tree.scales().side_denominator(cur_level));
                for (int axis = 0; axis < d; ++axis) {
                    const double loc = static_cast<double>(
                        corners[static_cast<std::size_t>(cur_level)]
                               [cur * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis)]);
                    x[static_cast<std::size_t>(axis)] =
                        (loc + (((state >> axis) & 1u) ? 1.0 : 0.0)) / den;
                }
                pts.push_back(map.apply(x));
            }
            double best = 0.0;
            const double eps = map.image_eps();
            for (std::size_t a = 0; a < pts.size(); ++a)
                for (std::size_t b2 = a + 1; b2 < pts.size(); ++b2) {
                    double s = 0.0;
                    for (std::size_t axis = 0; axis < pts[a].size(); ++axis) {
                        const double diff = pts[a][axis] - pts[b2][axis];
                        s += diff * diff;
                    }
                    best = std::max(best, std::sqrt(s));
                }
            dm[i] = eps == 1.0 ? best : std::pow(best, eps);
        }
    }
    return dt;
}

DiameterTree image_diameters(const SurvivalTree& tree, const SampledMap& cloud) {
    cloud.validate();
    if (cloud.domain.dim != tree.dim())
        throw UnsupportedDimension("point cloud dimension does not match the tree");
    const int depth = tree.depth();
    const int d = tree.dim();
    const auto corners = corners_by_level(tree);

    DiameterTree dt;
    dt.tree = &tree;
    dt.provenance = DiameterTree::Provenance::PointCloud;
    dt.diam.resize(static_cast<std::size_t>(depth) + 1);

    std::vector<std::vector<std::vector<std::size_t>>> members(
        static_cast<std::size_t>(depth) + 1);
    for (int level = 0; level <= depth; ++level) {
        members[static_cast<std::size_t>(level)].resize(tree.count(level));
        const double den = static_cast<double>(tree.scales().side_denominator(level));
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            auto& list = members[static_cast<std::size_t>(level)][i];
            for (std::size_t pidx = 0; pidx < cloud.domain.size(); ++pidx) {
                bool inside = true;
                for (int axis = 0; axis < d && inside; ++axis) {
                    const double lo = static_cast<double>(
                        corners[static_cast<std::size_t>(level)]
                               [i * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis)]) /
                        den;
                    const double v = cloud.domain.point(pidx)[axis];
                    inside = v >= lo && v <= lo + 1.0 / den;
                }
                if (inside) list.push_back(pidx);
            }
        }
    }
    for (int level = 0; level <= depth; ++level) {
        auto& dm = dt.diam[static_cast<std::size_t>(level)];
        dm.resize(tree.count(level));
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            const auto& list = members[static_cast<std::size_t>(level)][i];
            if (list.size() >= 2) {
                double best = 0.0;
                for (std::size_t a = 0; a < list.size(); ++a)
                    for (std::size_t b = a + 1; b < list.size(); ++b)
                        best = std::max(best, cloud.image.dist(list[a], list[b]));
                dm[i] = best;
            } else {
                if (level == 0)
                    throw PreconditionError("point cloud too sparse to cover the root");
                // documented fallback: parent diameter scaled by the subdivision
                const double parent =
                    dt.diam[static_cast<std::size_t>(level) - 1][tree.parent_of(level, i)];
                dm[i] = parent / static_cast<double>(tree.scales().branching(level));
                dt.flagged.push_back({level, i});
            }
        }
    }
    return dt;
}

std::string CylinderMeasure::csv(const DiameterTree& dt, double alpha) const {
    std::ostringstream out;
    out << "address,mass,diameter,ratio\n";
    char buf[64];
    for (int level = 0; level <= tree->depth(); ++level)
        for (std::size_t i = 0; i < tree->count(level); ++i) {
            out << tree->address_of(level, i).str() << ',';
            std::snprintf(buf, sizeof buf, "%.17g", at(level, i));
            out << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", dt.at(level, i));
            out << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g",
                          at(level, i) / std::pow(dt.at(level, i), alpha));
            out << buf << '\n';
        }
    return out.str();
}

SubadditivityReport subadditivity_check(const DiameterTree& dt, double alpha) {
    const SurvivalTree& tree = *dt.tree;
    SubadditivityReport report;
    report.worst_ratio = std::numeric_limits<double>::infinity();
    report.all_pass = true;
    for (int level = 0; level < tree.depth(); ++level)
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            auto [b, e] = tree.children(level, i);
            if (b == e) continue;
            double sum = 0.0;
            for (std::size_t c = b; c < e; ++c)
                sum += std::pow(dt.at(level + 1, c), alpha);
            const double ratio = sum / std::pow(dt.at(level, i), alpha);
            const bool pass = ratio >= 1.0;
            report.rows.push_back({level, i, ratio, pass});
            report.worst_ratio = std::min(report.worst_ratio, ratio);
            report.all_pass = report.all_pass && pass;
        }
    return report;
}

ChainBoundReport chain_bound_check(const DiameterTree& dt, const DistortionFunction& eta) {
    const SurvivalTree& tree = *dt.tree;
    ChainBoundReport report;
    report.all_pass = true;
    const double c_eta = 16.0 * eta(2.0);
    for (int level = 0; level < tree.depth(); ++level) {
        const int N = tree.scales().branching(level + 1);
        std::uint64_t columns = 1;
        for (int axis = 0; axis < tree.dim() - 1; ++axis)
            columns *= static_cast<std::uint64_t>(N);
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            auto [b, e] = tree.children(level, i);
            if (b == e) continue;
            std::vector<double> colsum(columns, 0.0);
            for (std::size_t c = b; c < e; ++c)
                colsum[tree.entry(level + 1, c).digit / static_cast<std::uint32_t>(N)] +=
                    dt.at(level + 1, c);
            for (std::uint64_t col = 0; col < columns; ++col) {
                const double lhs = dt.at(level, i);
                const double rhs = c_eta * colsum[col];
                const bool pass = lhs <= rhs;
                report.rows.push_back({level, i, col, lhs, rhs, pass});
                report.all_pass = report.all_pass && pass;
            }
        }
    }
    return report;
}

CylinderMeasure build_measure_fat(const DiameterTree& dt, double alpha) {
    const SurvivalTree& tree = *dt.tree;
    if (alpha < 0.0) throw DomainError("alpha must be >= 0");
    CylinderMeasure mu;
    mu.tree = &tree;
    mu.mass.resize(static_cast<std::size_t>(tree.depth()) + 1);
    mu.mass[0] = {1.0};
    for (int level = 0; level < tree.depth(); ++level) {
        auto& next = mu.mass[static_cast<std::size_t>(level) + 1];
        next.assign(tree.count(level + 1), 0.0);
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            auto [b, e] = tree.children(level, i);
            if (b == e) continue;
            double sum = 0.0;
            for (std::size_t c = b; c < e; ++c) sum += std::pow(dt.at(level + 1, c), alpha);
            if (sum <= 0.0) throw DegenerateMass("zero sibling diameter sum");
            const double parent_mass = mu.at(level, i);
            for (std::size_t c = b; c < e; ++c)
                next[c] = parent_mass * std::pow(dt.at(level + 1, c), alpha) / sum;
        }
    }
    return mu;
}

FrostmanResult frostman_verify(const CylinderMeasure& mu, const DiameterTree& dt, double alpha,
                               double ceiling) {
    if (mu.tree != dt.tree) throw PreconditionError("measure and diameters use different trees");
    const SurvivalTree& tree = *mu.tree;
    FrostmanResult result;
    result.alpha = alpha;
    result.depth = tree.depth();
    result.ceiling = ceiling;
    result.root_ratio = mu.at(0, 0) / std::pow(dt.at(0, 0), alpha);
    result.c_star = 0.0;
    for (int level = 0; level <= tree.depth(); ++level)
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            const double diam = dt.at(level, i);
            if (diam <= 0.0) throw DegenerateMass("zero diameter on a retained node");
            const double ratio = mu.at(level, i) / std::pow(diam, alpha);
            if (ratio > result.c_star) {
                result.c_star = ratio;
                result.worst_level = level;
                result.worst_node = i;
            }
        }
    result.pass = result.c_star <= ceiling * result.root_ratio * (1.0 + 1e-12);
    return result;
}

DimensionCertificate dim_lower_bound(const FrostmanResult& result, double alpha) {
    if (!result.pass)
        throw PreconditionError("dimension certificate requires a passing verification");
    DimensionCertificate cert;
    cert.alpha = alpha;
    cert.constant = result.c_star / result.root_ratio;
    cert.depth = result.depth;
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", alpha);
    out << "mass distribution: box/Hausdorff dimension >= " << buf << " at depth " << cert.depth;
    std::snprintf(buf, sizeof buf, "%.6g", cert.constant);
    out << " (C* = " << buf << " relative to the root, finite-depth certificate)";
    cert.text = out.str();
    return cert;
}

std::vector<int> dyadic_exponents(const ScaleSequence& scales) {
    std::vector<int> ks;
    for (int n : scales.levels) {
        int k = 0;
        int v = n;
        while (v > 1 && v % 2 == 0) {
            v /= 2;
            ++k;
        }
        if (v != 1) throw DomainError("branching factor " + std::to_string(n) + " is not a power of two");
        ks.push_back(k);
    }
    return ks;
}

SurvivalTree dyadic_refine(const SurvivalTree& tree) {
    const auto ks = dyadic_exponents(tree.scales());
    const int d = tree.dim();
    ScaleSequence fine{d, {}};
    for (int level = 1; level <= tree.depth(); ++level)
        fine.levels.insert(fine.levels.end(),
                           static_cast<std::size_t>(ks[static_cast<std::size_t>(level) - 1]), 2);

    SurvivalTree out(fine);
    // refined index of each construction node at its dyadic level
    std::vector<std::size_t> anchor{0};
    for (int level = 1; level <= tree.depth(); ++level) {
        const int k = ks[static_cast<std::size_t>(level) - 1];
        const int N = tree.scales().branching(level);
        // cur[c] = refined ancestor of construction child c at the previous step
        std::vector<std::size_t> cur(tree.count(level));
        std::vector<std::vector<int>> tuples(tree.count(level));
        for (std::size_t c = 0; c < tree.count(level); ++c) {
            cur[c] = anchor[tree.entry(level, c).parent];
            tuples[c] = linear_to_digit_tuple(tree.entry(level, c).digit, N, d);
        }
        for (int j = 1; j <= k; ++j) {
            std::vector<SurvivalTree::Entry> entries;
            entries.reserve(tree.count(level));
            std::vector<std::uint32_t> bits(tree.count(level));
            for (std::size_t c = 0; c < tree.count(level); ++c) {
                std::uint32_t bit = 0;
                for (int axis = 0; axis < d; ++axis)
                    bit = (bit << 1) |
                          static_cast<std::uint32_t>((tuples[c][static_cast<std::size_t>(axis)] >>
                                                      (k - j)) & 1);
                bits[c] = bit;
                entries.push_back({static_cast<std::uint32_t>(cur[c]), bit});
            }
            std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
                return a.parent < b.parent || (a.parent == b.parent && a.digit < b.digit);
            });
            entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
            // map (parent, digit) -> index at the new level
            for (std::size_t c = 0; c < tree.count(level); ++c) {
                const SurvivalTree::Entry key{static_cast<std::uint32_t>(cur[c]), bits[c]};
                const auto it = std::lower_bound(
                    entries.begin(), entries.end(), key, [](const auto& a, const auto& b) {
                        return a.parent < b.parent || (a.parent == b.parent && a.digit < b.digit);
                    });
                cur[c] = static_cast<std::size_t>(it - entries.begin());
            }
            out.push_level(std::move(entries));
        }
        anchor = std::move(cur);
    }
    return out;
}

void DenseMeasureParams::validate(int d) const {
    if (!(alpha > 0.0 && alpha < t && t < static_cast<double>(d)))
        throw DomainError("dense measure requires 0 < alpha < t < d");
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("beta must lie in (0,1]");
    const double low = gamma_window_low();
    if (!(gamma > low && gamma < 1.0)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "gamma must lie in (%.12g, 1); got %.12g", low, gamma);
        throw DomainError(buf);
    }
}

DenseMeasureResult build_measure_dense(const DiameterTree& dyadic_dt,
                                       const DenseMeasureParams& params,
                                       const std::vector<int>& k_exponents, int n0) {
    const SurvivalTree& tree = *dyadic_dt.tree;
    params.validate(tree.dim());
    for (int n : tree.scales().levels)
        if (n != 2) throw PreconditionError("dense measure expects a dyadic refinement");

    // construction-scale boundaries S_n
    std::vector<int> S{0};
    for (int k : k_exponents) S.push_back(S.back() + k);
    const int depth = tree.depth();
    int n_max = -1;
    for (std::size_t n = 0; n < S.size(); ++n)
        if (S[n] == depth) n_max = static_cast<int>(n);
    if (n_max < 0) throw PreconditionError("tree depth must end on a construction scale");
    if (n0 < 0 || n0 >= n_max) throw PreconditionError("n0 must name a construction scale above the depth");

    DenseMeasureResult result;
    CylinderMeasure& mu = result.measure;
    mu.tree = &tree;
    mu.mass.resize(static_cast<std::size_t>(depth) + 1);
    for (int level = 0; level <= depth; ++level)
        mu.mass[static_cast<std::size_t>(level)].assign(tree.count(level), 0.0);

    const int start = S[static_cast<std::size_t>(n0)];
    mu.mass[static_cast<std::size_t>(start)][0] = 1.0;  // lexicographically first start cube
    result.assigned_levels.push_back(start);

    const double t = params.t;
    auto split_one_step = [&](int level) {
        // standard sibling split from `level` to `level`+1
        auto& next = mu.mass[static_cast<std::size_t>(level) + 1];
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            const double m = mu.at(level, i);
            if (m == 0.0) continue;
            auto [b, e] = tree.children(level, i);
            double sum = 0.0;
            for (std::size_t c = b; c < e; ++c) sum += std::pow(dyadic_dt.at(level + 1, c), t);
            if (sum <= 0.0 || b == e) throw DegenerateMass("mass stranded at a childless node");
            for (std::size_t c = b; c < e; ++c)
                next[c] = m * std::pow(dyadic_dt.at(level + 1, c), t) / sum;
        }
        result.assigned_levels.push_back(level + 1);
    };

    for (int band = n0; band < n_max; ++band) {
        const int s_lo = S[static_cast<std::size_t>(band)];
        const int s_hi = S[static_cast<std::size_t>(band) + 1];
        const double cut =
            static_cast<double>(s_lo) +
            params.gamma * static_cast<double>(k_exponents[static_cast<std::size_t>(band)]);
        // largest integer strictly below the cut
        int k0p = static_cast<int>(std::ceil(cut)) - 1;
        if (std::abs(cut - std::round(cut)) < 1e-9) {
            result.boundary_flags.push_back(band);
            k0p = static_cast<int>(std::round(cut)) - 1;
        }
        k0p = std::max(k0p, s_lo);
        k0p = std::min(k0p, s_hi - 1);

        for (int level = s_lo; level < k0p; ++level) split_one_step(level);

        // jump split: k0p directly to s_hi, proportional over all descendants
        if (k0p + 1 == s_hi) {
            split_one_step(k0p);
        } else {
            // ancestor at k0p of every node at s_hi
            std::vector<std::size_t> anc(tree.count(s_hi));
            for (std::size_t i = 0; i < tree.count(s_hi); ++i) {
                std::size_t cur = i;
                for (int level = s_hi; level > k0p; --level) cur = tree.parent_of(level, cur);
                anc[i] = cur;
            }
            std::vector<double> sums(tree.count(k0p), 0.0);
            for (std::size_t i = 0; i < tree.count(s_hi); ++i)
                sums[anc[i]] += std::pow(dyadic_dt.at(s_hi, i), t);
            for (std::size_t i = 0; i < tree.count(s_hi); ++i) {
                const double m = mu.at(k0p, anc[i]);
                if (m == 0.0) continue;
                if (sums[anc[i]] <= 0.0) throw DegenerateMass("zero descendant diameter sum");
                mu.mass[static_cast<std::size_t>(s_hi)][i] =
                    m * std::pow(dyadic_dt.at(s_hi, i), t) / sums[anc[i]];
            }
            for (std::size_t i = 0; i < tree.count(k0p); ++i)
                if (mu.at(k0p, i) > 0.0 && sums[i] <= 0.0)
                    throw DegenerateMass("mass stranded above the jump");
            result.assigned_levels.push_back(s_hi);
            // masses of the skipped levels are defined by restriction
            for (int level = s_hi - 1; level > k0p; --level) {
                auto& cur = mu.mass[static_cast<std::size_t>(level)];
                for (std::size_t i = 0; i < tree.count(level); ++i) {
                    auto [b, e] = tree.children(level, i);
                    double sum = 0.0;
                    for (std::size_t c = b; c < e; ++c)
                        sum += mu.at(level + 1, c);
                    cur[i] = sum;
                }
            }
        }
    }

    // restriction masses above the start level
    for (int level = start - 1; level >= 0; --level)
        for (std::size_t i = 0; i < tree.count(level); ++i) {
            auto [b, e] = tree.children(level, i);
            double sum = 0.0;
            for (std::size_t c = b; c < e; ++c) sum += mu.at(level + 1, c);
            mu.mass[static_cast<std::size_t>(level)][i] = sum;
        }
    return result;
}

SkipScaleFit skip_scale_check(const DiameterTree& dyadic_dt, const std::vector<int>& k_exponents,
                              int n0, double gamma, double beta) {
    const SurvivalTree& tree = *dyadic_dt.tree;
    std::vector<int> S{0};
    for (int k : k_exponents) S.push_back(S.back() + k);
    const double droot = dyadic_dt.at(0, 0);

    SkipScaleFit fit;
    for (std::size_t band = static_cast<std::size_t>(n0); band + 1 < S.size(); ++band) {
        if (S[band + 1] > tree.depth()) break;
        const double cut = static_cast<double>(S[band]) +
                           gamma * static_cast<double>(k_exponents[band]);
        const int k0p = std::max(static_cast<int>(std::ceil(cut)) - 1, S[band]);
        const double N_next = std::pow(2.0, k_exponents[band]);
        const double scale = droot * std::pow(N_next, -gamma * beta);
        double band_worst = 0.0;
        for (int level = k0p + 1; level < S[band + 1]; ++level)
            for (std::size_t i = 0; i < tree.count(level); ++i) {
                band_worst = std::max(band_worst, dyadic_dt.at(level, i) / scale);
                ++fit.nodes_checked;
            }
        fit.band_K.push_back(band_worst);
        fit.K = std::max(fit.K, band_worst);
    }
    return fit;
}

}  // namespace fraclab
