// mlp.hpp
// From-scratch multilayer perceptron trained as a shared-weight pair on
// relative displacements; after training it compensates absolute points.
// Leaky ReLU hidden layers, inverted dropout, manual backprop, Adam.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "emt/geometry.hpp"

namespace emt {

// Per-channel affine map to [0, 1] for inputs, inverted on outputs. Output
// bounds are the position channels of the input bounds.
struct Normalizer {
    std::vector<double> in_min, in_max;
    std::vector<double> out_min, out_max;

    std::vector<double> normalize_in(const std::vector<double>& v) const;
    std::vector<double> denormalize_out(const std::vector<double>& z) const;
    std::vector<double> normalize_out(const std::vector<double>& v) const;
};

// Multiplier per hidden layer unit: 0 for dropped units, 1/(1-rate) for kept
// ones. Empty means no dropout.
using DropoutMasks = std::vector<std::vector<double>>;

struct PairMasks {
    DropoutMasks branch1;
    DropoutMasks branch2;
};

struct MlpModel {
    std::vector<int> layer_dims;                // input, hidden..., output
    std::vector<std::vector<double>> weights;   // per layer, row-major out x in
    std::vector<std::vector<double>> biases;    // per layer
    double leaky_slope = 0.01;
    double dropout_rate = 0.0;
    Normalizer normalizer;

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    // Position channels equal the output dimension; one extra input channel
    // means the quality indicator is fed alongside the position.
    bool uses_quality() const { return input_dim() == output_dim() + 1; }
    std::size_t n_layers() const { return weights.size(); }
};

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 512;
    int epochs = 500;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double dropout_rate = 0.0;
    std::vector<int> hidden_dims = {32, 32, 32};
    bool use_quality = true;
    double norm_margin = 0.05;
    // Fix the rigid-motion gauge of the displacement objective by aligning
    // compensated outputs to the measured training positions after training.
    bool align_output = true;
};

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

struct AdamState {
    std::vector<std::vector<double>> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    long step = 0;
};

// Model input vector for a measurement: first output_dim position coordinates,
// then the quality indicator when the model consumes it.
std::vector<double> model_input(const MlpModel& model, const Measurement& m);

// Normalize, hidden layers with leaky ReLU (masked when masks given), linear
// output layer, denormalize. Throws std::domain_error on dimension mismatch.
std::vector<double> forward(const MlpModel& model, const std::vector<double>& input,
                            const DropoutMasks* masks = nullptr);

// Mean over the batch of (||f(x2,q2) - f(x1,q1)|| - y)^2.
double displacement_loss(const MlpModel& model, const std::vector<DisplacementPair>& batch,
                         const std::vector<PairMasks>* masks = nullptr);

// Exact analytic gradient of displacement_loss; both siamese branches
// accumulate into the shared parameters. Coincident compensated outputs get a
// zero norm-subgradient.
Gradients gradients(const MlpModel& model, const std::vector<DisplacementPair>& batch,
                    const std::vector<PairMasks>* masks = nullptr);

AdamState make_adam_state(const MlpModel& model);
void adam_step(MlpModel& model, AdamState& state, const Gradients& grads, const TrainConfig& config);

// One multiplier vector per hidden layer, drawn Bernoulli(1-rate).
DropoutMasks sample_dropout_masks(const std::vector<int>& layer_dims, double rate,
                                  std::mt19937_64& rng);

// He-style fan-in uniform initialization; biases zero.
MlpModel make_mlp(int out_dim, const TrainConfig& config, const Normalizer& normalizer);

Normalizer fit_normalizer(const std::vector<DisplacementPair>& pairs, int out_dim,
                          bool use_quality, double margin);
Normalizer fit_normalizer(const std::vector<Measurement>& measurements, int out_dim,
                          bool use_quality, double margin);

// Shuffled mini-batch Adam on the displacement loss with dropout active;
// returns the parameters of the epoch with the lowest validation displacement
// RMSE. Deterministic given the seed. Throws std::domain_error on an empty
// training set.
MlpModel train_mlp(const std::vector<DisplacementPair>& train_pairs,
                   const std::vector<DisplacementPair>& val_pairs, int out_dim,
                   const TrainConfig& config);

// Deterministic inference path (no dropout).
std::vector<double> compensate(const MlpModel& model, const Measurement& m);

// Wraps a trained model as a reusable compensator callback.
PointCompensator make_compensator(const MlpModel& model);

// Rigid-aligns compensated outputs onto the measured positions (Kabsch) and
// folds the transform into the output layer. The displacement objective only
// pins the compensation function up to a rigid motion; measured positions are
// an online-available anchor because distortion is a small perturbation.
void align_to_measured(MlpModel& model, const std::vector<Measurement>& measurements);

// Validation metric used for checkpoint selection.
double displacement_rmse(const MlpModel& model, const std::vector<DisplacementPair>& pairs);

}  // namespace emt
