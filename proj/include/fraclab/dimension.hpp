#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"
#include "fraclab/qs.hpp"

namespace fraclab {

struct BoxCountSeries {
    struct Point {
        double r = 0.0;
        std::uint64_t count = 0;
    };
    std::vector<Point> points;  // decreasing r

    std::string csv() const;
};

// Grid-cell count at a construction scale; for trees this is exactly the
// retained count of that level.
std::uint64_t box_count(const SurvivalTree& tree, int level);
// r must match a construction scale of the tree.
std::uint64_t box_count_at_scale(const SurvivalTree& tree, double r);
// Occupied cells of a uniform grid of side r over a point cloud.
std::uint64_t box_count(const PointSet& points, double r);

BoxCountSeries tree_count_series(const SurvivalTree& tree);
BoxCountSeries cloud_count_series(const PointSet& points, const std::vector<double>& scales);

struct DimFit {
    double slope = 0.0;
    double stderr_ = 0.0;
    double residual = 0.0;  // sum of squared residuals of the fit
    int points = 0;

    std::string summary() const;
};

// Least-squares slope of log(count) against log(1/r) over
// points[window_begin .. window_begin+window_len).
DimFit estimate_dim(const BoxCountSeries& series, std::size_t window_begin,
                    std::size_t window_len);

}  // namespace fraclab
