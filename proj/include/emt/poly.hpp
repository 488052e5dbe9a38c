// poly.hpp
// Mixed-term polynomial regression compensator, the comparison baseline.
// Trains on the same displacement objective as the network; an auxiliary
// closed-form absolute fit exists for oracle checks.

#pragma once

#include <cstdint>
#include <vector>

#include "emt/geometry.hpp"
#include "emt/mlp.hpp"

namespace emt {

struct PolyModel {
    int degree = 3;
    int n_inputs = 3;
    // One coefficient vector per output dimension, over monomials in graded
    // lexicographic order (degree ascending, exponent tuples lex-descending
    // within a degree).
    std::vector<std::vector<double>> coefficients;
    Normalizer normalizer;

    int output_dim() const { return static_cast<int>(coefficients.size()); }
    bool uses_quality() const { return n_inputs == output_dim() + 1; }
};

// Exponent tuples for all monomials with total degree <= degree.
std::vector<std::vector<int>> monomial_exponents(int n_inputs, int degree);

// Monomial values at `input`, matching monomial_exponents order.
std::vector<double> poly_features(const std::vector<double>& input, int degree);

std::size_t poly_feature_count(int n_inputs, int degree);

// Identity-map coefficients in normalized space.
PolyModel make_identity_poly(int out_dim, int degree, bool use_quality,
                             const Normalizer& normalizer);

// Minimizes the displacement loss with Adam over the coefficients,
// initialized at the identity map; checkpoints on validation RMSE.
PolyModel train_poly(const std::vector<DisplacementPair>& train_pairs,
                     const std::vector<DisplacementPair>& val_pairs, int out_dim, int degree,
                     const TrainConfig& config);

// Closed-form least-squares fit on absolute positions (normalized space):
// compensated(measured) ~ ground truth. Used as an analytic oracle route.
PolyModel fit_poly_absolute(const std::vector<Measurement>& measurements, int out_dim, int degree,
                            bool use_quality, double norm_margin = 0.05);

// normalize -> features -> per-dimension dot product -> denormalize.
std::vector<double> poly_compensate(const PolyModel& model, const Measurement& m);

PointCompensator make_poly_compensator(const PolyModel& model);

double poly_displacement_loss(const PolyModel& model, const std::vector<DisplacementPair>& batch);

}  // namespace emt
