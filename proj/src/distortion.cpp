#include "emt/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace emt {

Vec3 distortion_offset(const DistortionConfig& config, const Vec3& p) {
    Vec3 total;
    for (const auto& source : config.sources) {
        const Vec3 delta = p - source.center_mm;
        const double r = delta.norm();
        Vec3 dir;
        if (source.mode == DirectionMode::Radial) {
            if (r == 0.0) continue;  // direction undefined at the singularity
            dir = delta * (1.0 / r);
        } else {
            const double n = source.fixed_direction.norm();
            if (n == 0.0) continue;
            dir = source.fixed_direction * (1.0 / n);
        }
        const double magnitude = source.amplitude_mm * std::exp(-r / source.decay_mm);
        total = total + dir * magnitude;
    }
    return total;
}

Vec3 distort(const DistortionConfig& config, const Vec3& p) {
    return p + distortion_offset(config, p);
}

double quality_of(const QualityModel& qm, double distortion_magnitude_mm, double range_mm) {
    const double eps = qm.epsilon_gain * distortion_magnitude_mm;
    return qm.sensitivity * (eps - (qm.offset + qm.slope * range_mm));
}

namespace {

double median_of(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::uint64_t point_salt(const GroundTruthPoint& gt) {
    std::uint64_t salt = static_cast<std::uint64_t>(gt.cell.row + 1);
    salt = salt * 131 + static_cast<std::uint64_t>(gt.cell.col + 1);
    salt = salt * 131 + static_cast<std::uint64_t>(gt.cell.elevation + 1);
    salt = salt * 131 + (gt.rotation == Rotation::Deg180 ? 2 : 1);
    return salt;
}

}  // namespace

Measurement sample_measurement(const DistortionConfig& config, const GroundTruthPoint& gt_point,
                               int n_samples) {
    if (n_samples < 1) throw std::domain_error("sample_measurement: n_samples must be >= 1");
    const Vec3 distorted = distort(config, gt_point.position_mm);

    std::mt19937_64 rng(seed_mix(config.seed, point_salt(gt_point)));
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<double> xs(n_samples), ys(n_samples), zs(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        xs[i] = distorted.x + config.noise_std_mm * noise(rng);
        ys[i] = distorted.y + config.noise_std_mm * noise(rng);
        zs[i] = distorted.z + config.noise_std_mm * noise(rng);
    }

    Measurement m;
    m.position_mm = {median_of(xs), median_of(ys), median_of(zs)};
    const double magnitude = distortion_offset(config, gt_point.position_mm).norm();
    m.quality = quality_of(config.quality, magnitude, gt_point.position_mm.norm());
    m.gt = gt_point;
    return m;
}

Dataset generate_dataset(const DistortionConfig& config, const GridSpec& spec, int n_samples) {
    Dataset dataset;
    for (Rotation rotation : {Rotation::Deg0, Rotation::Deg180}) {
        for (int elevation = 0; elevation < spec.n_elevations; ++elevation) {
            for (const auto& [row, col] : spec.calibrated_cells) {
                GroundTruthPoint gt;
                gt.cell = {row, col, elevation};
                gt.rotation = rotation;
                gt.position_mm = grid_position(spec, gt.cell, rotation);
                dataset.measurements.push_back(sample_measurement(config, gt, n_samples));
            }
        }
    }
    return dataset;
}

Dataset generate_planar_dataset(const DistortionConfig& config, const GridSpec& spec,
                                const std::vector<std::pair<int, int>>& placement_offsets,
                                int group_id, int n_samples) {
    Dataset dataset;
    std::set<std::pair<int, int>> seen;
    for (const auto& [row_off, col_off] : placement_offsets) {
        for (const auto& [row, col] : spec.calibrated_cells) {
            const int r = row + row_off;
            const int c = col + col_off;
            if (!spec.in_bounds(r, c)) continue;
            if (!seen.insert({r, c}).second) continue;
            GroundTruthPoint gt;
            gt.cell = {r, c, 0};
            gt.rotation = Rotation::Deg0;
            gt.position_mm = grid_position(spec, gt.cell, Rotation::Deg0);
            Measurement m = sample_measurement(config, gt, n_samples);
            m.group = group_id;
            dataset.measurements.push_back(std::move(m));
        }
    }
    return dataset;
}

Dataset generate_board_dataset(const DistortionConfig& config, const GridSpec& spec, int n_samples) {
    Dataset dataset;
    for (int row = 0; row < spec.n_rows; ++row) {
        for (int col = 0; col < spec.n_cols; ++col) {
            GroundTruthPoint gt;
            gt.cell = {row, col, 0};
            gt.rotation = Rotation::Deg0;
            gt.position_mm = grid_position(spec, gt.cell, Rotation::Deg0);
            dataset.measurements.push_back(sample_measurement(config, gt, n_samples));
        }
    }
    return dataset;
}

}  // namespace emt
