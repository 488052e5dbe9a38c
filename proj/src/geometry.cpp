#include "emt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace emt {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

GridSpec default_grid_spec() {
    GridSpec spec;
    // Ten-cell phantom pattern placed centrally on the board.
    const std::vector<std::pair<int, int>> pattern = {
        {0, 0}, {0, 5}, {0, 10}, {3, 2}, {3, 7},
        {6, 4}, {6, 11}, {9, 0}, {9, 8}, {11, 11},
    };
    const int row_off = 10;
    const int col_off = 10;
    spec.calibrated_cells.reserve(pattern.size());
    for (const auto& [r, c] : pattern) {
        spec.calibrated_cells.emplace_back(r + row_off, c + col_off);
    }
    return spec;
}

Vec3 grid_position(const GridSpec& spec, const CellIndex& cell, Rotation rotation) {
    if (!spec.in_bounds(cell.row, cell.col) || cell.elevation < 0 ||
        cell.elevation >= spec.n_elevations) {
        throw std::domain_error("grid_position: cell out of bounds");
    }
    double x = cell.row * spec.pitch_mm;
    double y = cell.col * spec.pitch_mm;
    const double z = cell.elevation * spec.elevation_step_mm;
    if (rotation == Rotation::Deg180) {
        // 180 degree turn about the horizontal board center.
        const double cx = 0.5 * (spec.n_rows - 1) * spec.pitch_mm;
        const double cy = 0.5 * (spec.n_cols - 1) * spec.pitch_mm;
        x = 2.0 * cx - x;
        y = 2.0 * cy - y;
    }
    return {x, y, z};
}

std::vector<DisplacementPair> build_displacement_pairs(const std::vector<Measurement>& points) {
    std::map<std::pair<int, int>, std::vector<const Measurement*>> buckets;
    for (const auto& m : points) {
        buckets[{m.group, static_cast<int>(m.gt.rotation)}].push_back(&m);
    }
    std::vector<DisplacementPair> pairs;
    for (const auto& [key, bucket] : buckets) {
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            for (std::size_t j = i + 1; j < bucket.size(); ++j) {
                DisplacementPair pair;
                pair.m1 = *bucket[i];
                pair.m2 = *bucket[j];
                pair.gt_distance_mm = distance(bucket[i]->gt.position_mm, bucket[j]->gt.position_mm);
                pairs.push_back(std::move(pair));
            }
        }
    }
    return pairs;
}

namespace {

double compensated_distance(const DisplacementPair& pair, const PointCompensator* compensator) {
    if (compensator == nullptr || !*compensator) {
        return distance(pair.m1.position_mm, pair.m2.position_mm);
    }
    const std::vector<double> a = (*compensator)(pair.m1);
    const std::vector<double> b = (*compensator)(pair.m2);
    double sq = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = b[d] - a[d];
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

}  // namespace

double displacement_error(const DisplacementPair& pair, const PointCompensator* compensator) {
    return compensated_distance(pair, compensator) - pair.gt_distance_mm;
}

double displacement_rmse(const std::vector<DisplacementPair>& pairs, const PointCompensator* compensator) {
    if (pairs.empty()) return 0.0;
    double sum_sq = 0.0;
    for (const auto& pair : pairs) {
        const double e = displacement_error(pair, compensator);
        sum_sq += e * e;
    }
    return std::sqrt(sum_sq / static_cast<double>(pairs.size()));
}

double max_displacement_error(const std::vector<DisplacementPair>& pairs, const PointCompensator* compensator) {
    double worst = 0.0;
    for (const auto& pair : pairs) {
        worst = std::max(worst, std::abs(displacement_error(pair, compensator)));
    }
    return worst;
}

std::vector<std::pair<int, int>> moore_neighbors(std::pair<int, int> cell, int radius,
                                                 std::pair<int, int> bounds) {
    if (radius < 1) throw std::domain_error("moore_neighbors: radius must be >= 1");
    std::vector<std::pair<int, int>> cells;
    for (int dr = -radius; dr <= radius; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int r = cell.first + dr;
            const int c = cell.second + dc;
            if (r < 0 || r >= bounds.first || c < 0 || c >= bounds.second) continue;
            cells.emplace_back(r, c);
        }
    }
    return cells;
}

double absolute_error_estimate(std::pair<int, int> cell,
                               const std::vector<std::optional<Vec3>>& positions,
                               const std::vector<std::optional<Vec3>>& gt,
                               std::pair<int, int> bounds, int radius) {
    const auto at = [&](const std::vector<std::optional<Vec3>>& grid,
                        std::pair<int, int> rc) -> const std::optional<Vec3>& {
        return grid[static_cast<std::size_t>(rc.first) * bounds.second + rc.second];
    };
    const auto& center_meas = at(positions, cell);
    const auto& center_gt = at(gt, cell);
    if (!center_meas || !center_gt) {
        throw std::domain_error("absolute_error_estimate: no data at center cell");
    }
    double sum = 0.0;
    int count = 0;
    for (const auto& n : moore_neighbors(cell, radius, bounds)) {
        const auto& nm = at(positions, n);
        const auto& ng = at(gt, n);
        if (!nm || !ng) continue;
        const double measured = distance(*center_meas, *nm);
        const double truth = distance(*center_gt, *ng);
        sum += std::abs(measured - truth);
        ++count;
    }
    if (count == 0) {
        throw std::domain_error("absolute_error_estimate: no neighbor with data");
    }
    return sum / count;
}

}  // namespace emt
