// uncertainty.hpp
// Monte-Carlo-dropout spatial uncertainty, training-density proxies and the
// linear relations between uncertainty, density and compensation error.

#pragma once

#include <cstdint>
#include <vector>

#include "emt/distortion.hpp"
#include "emt/geometry.hpp"
#include "emt/mlp.hpp"

namespace emt {

struct UncertaintyEstimate {
    std::vector<double> point;           // compensated mean position
    double sigma_mm = 0.0;               // root-sum-square of per-dim stds
    std::vector<double> per_dim_std_mm;
    int n_samples = 0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double pearson_r = 0.0;
};

// n stochastic forward passes with independent dropout masks drawn at `rate`.
// Deterministic given the seed.
std::vector<std::vector<double>> mc_samples(const MlpModel& model,
                                            const std::vector<double>& input, int n, double rate,
                                            std::uint64_t seed);

// Per-dimension sample standard deviation combined by root-sum-square.
// Throws std::domain_error for fewer than two samples.
UncertaintyEstimate spatial_sigma(const std::vector<std::vector<double>>& samples);

// Minimum Euclidean distance by exhaustive scan.
double nearest_training_distance(const std::vector<double>& p,
                                 const std::vector<std::vector<double>>& training_points);

// Ordinary least squares; Pearson r is 0 when ys are constant. Throws
// std::domain_error when xs are all equal or fewer than two points.
LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// Dense sigma field over the board, one estimate per cell of the evaluation
// dataset (row-major n_rows x n_cols).
struct SigmaField {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<UncertaintyEstimate> cells;

    const UncertaintyEstimate& at(int row, int col) const {
        return cells[static_cast<std::size_t>(row) * n_cols + col];
    }
};

// MC-dropout sigma at every cell of a full-board planar dataset. Per-cell
// seeds are split deterministically so evaluation order does not matter.
SigmaField uncertainty_map(const MlpModel& model, const Dataset& board, const GridSpec& spec,
                           int n_samples, double rate, std::uint64_t seed);

}  // namespace emt
