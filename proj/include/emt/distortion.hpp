// distortion.hpp
// Synthetic field distortion: maps true positions to distorted measurements
// with sensor noise and a quality indicator, replacing the tracker hardware.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emt/geometry.hpp"
#include "emt/rng.hpp"

namespace emt {

enum class DirectionMode { Radial, Fixed };

// One exponentially decaying offset source. Radial mode pushes points away
// from the source center; Fixed mode applies a constant unit direction.
struct DistortionSource {
    Vec3 center_mm;
    double amplitude_mm = 0.0;
    double decay_mm = 1.0;
    DirectionMode mode = DirectionMode::Radial;
    Vec3 fixed_direction{0.0, 0.0, 1.0};
};

// Q = S * (eps - (b + m * r)) with eps = epsilon_gain * local distortion
// magnitude. Raw mode keeps S=1, b=0, m=0.
struct QualityModel {
    double sensitivity = 1.0;
    double offset = 0.0;
    double slope = 0.0;
    double epsilon_gain = 1.0;
};

struct DistortionConfig {
    std::vector<DistortionSource> sources;
    double noise_std_mm = 0.1;
    QualityModel quality;
    std::uint64_t seed = 0;
};

// Summed offset field at p (noise excluded).
Vec3 distortion_offset(const DistortionConfig& config, const Vec3& p);

// p plus the offset field.
Vec3 distort(const DistortionConfig& config, const Vec3& p);

double quality_of(const QualityModel& qm, double distortion_magnitude_mm, double range_mm);

// Coordinate-wise median of n_samples draws of distort(p) + Gaussian noise.
// Quality is evaluated at the true position. Deterministic in
// (config.seed, gt_point).
Measurement sample_measurement(const DistortionConfig& config, const GroundTruthPoint& gt_point,
                               int n_samples);

struct Dataset {
    std::string scenario;
    std::vector<Measurement> measurements;
};

// Measures every calibrated cell at every elevation and both rotations.
Dataset generate_dataset(const DistortionConfig& config, const GridSpec& spec, int n_samples = 500);

// Planar acquisition (elevation 0, Deg0) under one distortion field: the
// calibrated pattern is stamped at each phantom placement offset (rows, cols).
// All measurements share group_id since the field is common; out-of-bounds or
// revisited cells are skipped.
Dataset generate_planar_dataset(const DistortionConfig& config, const GridSpec& spec,
                                const std::vector<std::pair<int, int>>& placement_offsets,
                                int group_id = 0, int n_samples = 500);

// Planar measurement of every board cell (elevation 0, Deg0), for dense
// evaluation maps.
Dataset generate_board_dataset(const DistortionConfig& config, const GridSpec& spec,
                               int n_samples = 500);

}  // namespace emt
