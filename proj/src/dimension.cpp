#include "fraclab/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace fraclab {

std::string BoxCountSeries::csv() const {
    std::ostringstream out;
    out << "r,count\n";
    char buf[64];
    for (const auto& pt : points) {
        std::snprintf(buf, sizeof buf, "%.17g", pt.r);
        out << buf << ',' << pt.count << '\n';
    }
    return out.str();
}

std::uint64_t box_count(const SurvivalTree& tree, int level) {
    if (level < 0 || level > tree.depth()) throw ScaleError("box_count: level out of range");
    return tree.count(level);
}

std::uint64_t box_count_at_scale(const SurvivalTree& tree, double r) {
    for (int level = 0; level <= tree.depth(); ++level) {
        const double side = 1.0 / static_cast<double>(tree.scales().side_denominator(level));
        if (std::abs(side - r) <= 1e-12 * side) return tree.count(level);
    }
    throw ScaleError("r does not match a construction scale of the tree");
}

std::uint64_t box_count(const PointSet& points, double r) {
    if (!(r > 0.0)) throw DomainError("box_count requires r > 0");
    std::map<std::vector<std::int64_t>, int> cells;
    std::vector<std::int64_t> key(static_cast<std::size_t>(points.dim));
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (int axis = 0; axis < points.dim; ++axis)
            key[static_cast<std::size_t>(axis)] =
                static_cast<std::int64_t>(std::floor(points.point(i)[axis] / r));
        cells[key] = 1;
    }
    return cells.size();
}

BoxCountSeries tree_count_series(const SurvivalTree& tree) {
    BoxCountSeries series;
    for (int level = 0; level <= tree.depth(); ++level)
        series.points.push_back(
            {1.0 / static_cast<double>(tree.scales().side_denominator(level)), tree.count(level)});
    return series;
}

BoxCountSeries cloud_count_series(const PointSet& points, const std::vector<double>& scales) {
    BoxCountSeries series;
    for (double r : scales) series.points.push_back({r, box_count(points, r)});
    std::sort(series.points.begin(), series.points.end(),
              [](const auto& a, const auto& b) { return a.r > b.r; });
    return series;
}

DimFit estimate_dim(const BoxCountSeries& series, std::size_t window_begin,
                    std::size_t window_len) {
    if (window_begin + window_len > series.points.size())
        throw InsufficientData("fit window exceeds the series");
    if (window_len < 3) throw InsufficientData("estimate_dim needs at least 3 scales");

    double sx = 0.0, sy = 0.0;
    for (std::size_t i = window_begin; i < window_begin + window_len; ++i) {
        sx += std::log(1.0 / series.points[i].r);
        sy += std::log(static_cast<double>(series.points[i].count));
    }
    const double n = static_cast<double>(window_len);
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = window_begin; i < window_begin + window_len; ++i) {
        const double dx = std::log(1.0 / series.points[i].r) - mx;
        const double dy = std::log(static_cast<double>(series.points[i].count)) - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (sxx == 0.0) throw InsufficientData("degenerate scale window");

    DimFit fit;
    fit.points = static_cast<int>(window_len);
    fit.slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = window_begin; i < window_begin + window_len; ++i) {
        const double dx = std::log(1.0 / series.points[i].r) - mx;
        const double dy = std::log(static_cast<double>(series.points[i].count)) - my;
        const double resid = dy - fit.slope * dx;
        ss += resid * resid;
    }
    fit.residual = ss;
    fit.stderr_ = window_len > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
    return fit;
}

std::string DimFit::summary() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "slope=%.12g stderr=%.6g residual=%.6g points=%d", slope,
                  stderr_, residual, points);
    return buf;
}

}  // namespace fraclab
