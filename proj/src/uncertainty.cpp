#include "emt/uncertainty.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "emt/rng.hpp"

namespace emt {

std::vector<std::vector<double>> mc_samples(const MlpModel& model,
                                            const std::vector<double>& input, int n, double rate,
                                            std::uint64_t seed) {
    if (n < 1) throw std::domain_error("mc_samples: n must be >= 1");
    std::mt19937_64 rng(seed_mix(seed, seed_salt::kDropout));
    std::vector<std::vector<double>> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) {
        const DropoutMasks masks = sample_dropout_masks(model.layer_dims, rate, rng);
        samples.push_back(forward(model, input, masks.empty() ? nullptr : &masks));
    }
    return samples;
}

UncertaintyEstimate spatial_sigma(const std::vector<std::vector<double>>& samples) {
    if (samples.size() < 2) throw std::domain_error("spatial_sigma: need at least two samples");
    const std::size_t dims = samples.front().size();
    const std::size_t n = samples.size();

    UncertaintyEstimate estimate;
    estimate.n_samples = static_cast<int>(n);
    estimate.point.assign(dims, 0.0);
    estimate.per_dim_std_mm.assign(dims, 0.0);

    for (const auto& s : samples) {
        for (std::size_t d = 0; d < dims; ++d) estimate.point[d] += s[d];
    }
    for (std::size_t d = 0; d < dims; ++d) estimate.point[d] /= static_cast<double>(n);

    double sum_var = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
        double acc = 0.0;
        for (const auto& s : samples) {
            const double diff = s[d] - estimate.point[d];
            acc += diff * diff;
        }
        const double var = acc / static_cast<double>(n - 1);
        estimate.per_dim_std_mm[d] = std::sqrt(var);
        sum_var += var;
    }
    estimate.sigma_mm = std::sqrt(sum_var);
    return estimate;
}

double nearest_training_distance(const std::vector<double>& p,
                                 const std::vector<std::vector<double>>& training_points) {
    if (training_points.empty()) {
        throw std::domain_error("nearest_training_distance: empty training set");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : training_points) {
        double sq = 0.0;
        for (std::size_t d = 0; d < p.size(); ++d) {
            const double diff = p[d] - t[d];
            sq += diff * diff;
        }
        best = std::min(best, sq);
    }
    return std::sqrt(best);
}

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() < 2 || xs.size() != ys.size()) {
        throw std::domain_error("linear_fit: need at least two paired points");
    }
    const double n = static_cast<double>(xs.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0) throw std::domain_error("linear_fit: degenerate xs");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    fit.pearson_r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
    return fit;
}

SigmaField uncertainty_map(const MlpModel& model, const Dataset& board, const GridSpec& spec,
                           int n_samples, double rate, std::uint64_t seed) {
    SigmaField field;
    field.n_rows = spec.n_rows;
    field.n_cols = spec.n_cols;
    field.cells.resize(static_cast<std::size_t>(spec.n_rows) * spec.n_cols);

    for (const auto& m : board.measurements) {
        const int row = m.gt.cell.row;
        const int col = m.gt.cell.col;
        const std::uint64_t cell_seed =
            seed_mix(seed, static_cast<std::uint64_t>(row) * spec.n_cols + col);
        const auto samples = mc_samples(model, model_input(model, m), n_samples, rate, cell_seed);
        field.cells[static_cast<std::size_t>(row) * spec.n_cols + col] = spatial_sigma(samples);
    }
    return field;
}

}  // namespace emt
