#include "emt/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "emt/linalg.hpp"
#include "emt/rng.hpp"

namespace emt {

std::vector<double> Normalizer::normalize_in(const std::vector<double>& v) const {
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        z[i] = (v[i] - in_min[i]) / (in_max[i] - in_min[i]);
    }
    return z;
}

std::vector<double> Normalizer::denormalize_out(const std::vector<double>& z) const {
    std::vector<double> v(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        v[i] = out_min[i] + z[i] * (out_max[i] - out_min[i]);
    }
    return v;
}

std::vector<double> Normalizer::normalize_out(const std::vector<double>& v) const {
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        z[i] = (v[i] - out_min[i]) / (out_max[i] - out_min[i]);
    }
    return z;
}

std::vector<double> model_input(const MlpModel& model, const Measurement& m) {
    std::vector<double> input;
    input.reserve(model.input_dim());
    const int pos_dims = model.output_dim();
    input.push_back(m.position_mm.x);
    if (pos_dims >= 2) input.push_back(m.position_mm.y);
    if (pos_dims >= 3) input.push_back(m.position_mm.z);
    if (model.uses_quality()) input.push_back(m.quality);
    return input;
}

namespace {

double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
double leaky_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

// Per-layer pre-activations and post-activation outputs of one branch.
struct ForwardCache {
    std::vector<double> input;                 // normalized input a0
    std::vector<std::vector<double>> pre;      // W a + b per layer
    std::vector<std::vector<double>> act;      // layer outputs (post mask)
    std::vector<double> output;                // denormalized
};

ForwardCache run_forward(const MlpModel& model, const std::vector<double>& input,
                         const DropoutMasks* masks) {
    if (static_cast<int>(input.size()) != model.input_dim()) {
        throw std::domain_error("forward: input dimension mismatch");
    }
    ForwardCache cache;
    cache.input = model.normalizer.normalize_in(input);
    const std::size_t n_layers = model.n_layers();
    cache.pre.resize(n_layers);
    cache.act.resize(n_layers);

    const std::vector<double>* a = &cache.input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t rows = model.layer_dims[l + 1];
        const std::size_t cols = model.layer_dims[l];
        cache.pre[l].resize(rows);
        la::matvec(model.weights[l], rows, cols, a->data(), cache.pre[l].data());
        for (std::size_t r = 0; r < rows; ++r) cache.pre[l][r] += model.biases[l][r];

        cache.act[l] = cache.pre[l];
        if (l + 1 < n_layers) {
            for (std::size_t r = 0; r < rows; ++r) {
                cache.act[l][r] = leaky(cache.act[l][r], model.leaky_slope);
            }
            if (masks != nullptr && !masks->empty()) {
                for (std::size_t r = 0; r < rows; ++r) cache.act[l][r] *= (*masks)[l][r];
            }
        }
        a = &cache.act[l];
    }
    cache.output = model.normalizer.denormalize_out(cache.act.back());
    return cache;
}

// Backpropagates d(loss)/d(output) through one branch, accumulating into
// grads (not averaged).
void backprop_branch(const MlpModel& model, const ForwardCache& cache,
                     const DropoutMasks* masks, const std::vector<double>& d_output,
                     Gradients& grads) {
    const std::size_t n_layers = model.n_layers();
    const int out_dim = model.output_dim();

    // Through output denormalization.
    std::vector<double> delta(out_dim);
    for (int i = 0; i < out_dim; ++i) {
        delta[i] = d_output[i] * (model.normalizer.out_max[i] - model.normalizer.out_min[i]);
    }

    for (std::size_t l = n_layers; l-- > 0;) {
        const std::size_t rows = model.layer_dims[l + 1];
        const std::size_t cols = model.layer_dims[l];
        if (l + 1 < n_layers) {
            // delta currently holds d(loss)/d(act[l]); through mask and leaky.
            if (masks != nullptr && !masks->empty()) {
                for (std::size_t r = 0; r < rows; ++r) delta[r] *= (*masks)[l][r];
            }
            for (std::size_t r = 0; r < rows; ++r) {
                delta[r] *= leaky_grad(cache.pre[l][r], model.leaky_slope);
            }
        }
        const std::vector<double>& below = (l == 0) ? cache.input : cache.act[l - 1];
        for (std::size_t r = 0; r < rows; ++r) {
            double* grow = grads.weights[l].data() + r * cols;
            const double dr = delta[r];
            for (std::size_t c = 0; c < cols; ++c) grow[c] += dr * below[c];
            grads.biases[l][r] += dr;
        }
        if (l > 0) {
            std::vector<double> next(cols);
            la::mat_t_vec(model.weights[l], rows, cols, delta.data(), next.data());
            delta = std::move(next);
        }
    }
}

Gradients make_zero_gradients(const MlpModel& model) {
    Gradients grads;
    grads.weights.resize(model.n_layers());
    grads.biases.resize(model.n_layers());
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        grads.weights[l].assign(model.weights[l].size(), 0.0);
        grads.biases[l].assign(model.biases[l].size(), 0.0);
    }
    return grads;
}

}  // namespace

std::vector<double> forward(const MlpModel& model, const std::vector<double>& input,
                            const DropoutMasks* masks) {
    return run_forward(model, input, masks).output;
}

double displacement_loss(const MlpModel& model, const std::vector<DisplacementPair>& batch,
                         const std::vector<PairMasks>* masks) {
    if (batch.empty()) throw std::domain_error("displacement_loss: empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const DisplacementPair& pair = batch[i];
        const PairMasks* pm = masks != nullptr ? &(*masks)[i] : nullptr;
        const std::vector<double> o1 =
            forward(model, model_input(model, pair.m1), pm != nullptr ? &pm->branch1 : nullptr);
        const std::vector<double> o2 =
            forward(model, model_input(model, pair.m2), pm != nullptr ? &pm->branch2 : nullptr);
        double sq = 0.0;
        for (std::size_t d = 0; d < o1.size(); ++d) {
            const double diff = o2[d] - o1[d];
            sq += diff * diff;
        }
        const double e = std::sqrt(sq) - pair.gt_distance_mm;
        total += e * e;
    }
    return total / static_cast<double>(batch.size());
}

Gradients gradients(const MlpModel& model, const std::vector<DisplacementPair>& batch,
                    const std::vector<PairMasks>* masks) {
    if (batch.empty()) throw std::domain_error("gradients: empty batch");
    Gradients grads = make_zero_gradients(model);
    const int out_dim = model.output_dim();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const DisplacementPair& pair = batch[i];
        const PairMasks* pm = masks != nullptr ? &(*masks)[i] : nullptr;
        const DropoutMasks* m1 = pm != nullptr ? &pm->branch1 : nullptr;
        const DropoutMasks* m2 = pm != nullptr ? &pm->branch2 : nullptr;
        const ForwardCache c1 = run_forward(model, model_input(model, pair.m1), m1);
        const ForwardCache c2 = run_forward(model, model_input(model, pair.m2), m2);

        std::vector<double> diff(out_dim);
        double sq = 0.0;
        for (int d = 0; d < out_dim; ++d) {
            diff[d] = c2.output[d] - c1.output[d];
            sq += diff[d] * diff[d];
        }
        const double n = std::sqrt(sq);
        if (n == 0.0) continue;  // zero subgradient at coincident outputs
        const double e = n - pair.gt_distance_mm;

        // d(loss_i)/d(o2) = 2 e diff / n, opposite sign for o1; batch mean.
        std::vector<double> d_o2(out_dim), d_o1(out_dim);
        const double scale = 2.0 * e / n * inv_batch;
        for (int d = 0; d < out_dim; ++d) {
            d_o2[d] = scale * diff[d];
            d_o1[d] = -d_o2[d];
        }
        backprop_branch(model, c2, m2, d_o2, grads);
        backprop_branch(model, c1, m1, d_o1, grads);
    }
    return grads;
}

AdamState make_adam_state(const MlpModel& model) {
    AdamState state;
    state.m_weights.resize(model.n_layers());
    state.v_weights.resize(model.n_layers());
    state.m_biases.resize(model.n_layers());
    state.v_biases.resize(model.n_layers());
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        state.m_weights[l].assign(model.weights[l].size(), 0.0);
        state.v_weights[l].assign(model.weights[l].size(), 0.0);
        state.m_biases[l].assign(model.biases[l].size(), 0.0);
        state.v_biases[l].assign(model.biases[l].size(), 0.0);
    }
    return state;
}

namespace {

void adam_update(std::vector<double>& theta, std::vector<double>& m, std::vector<double>& v,
                 const std::vector<double>& g, double lr, double beta1, double beta2, double eps,
                 double bias1, double bias2) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        theta[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace

void adam_step(MlpModel& model, AdamState& state, const Gradients& grads,
               const TrainConfig& config) {
    ++state.step;
    const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        adam_update(model.weights[l], state.m_weights[l], state.v_weights[l], grads.weights[l],
                    config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps,
                    bias1, bias2);
        adam_update(model.biases[l], state.m_biases[l], state.v_biases[l], grads.biases[l],
                    config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps,
                    bias1, bias2);
    }
}

DropoutMasks sample_dropout_masks(const std::vector<int>& layer_dims, double rate,
                                  std::mt19937_64& rng) {
    DropoutMasks masks;
    if (rate <= 0.0) return masks;
    const double keep = 1.0 - rate;
    const double scale = 1.0 / keep;
    std::bernoulli_distribution keep_dist(keep);
    masks.resize(layer_dims.size() - 2);
    for (std::size_t l = 0; l + 2 < layer_dims.size(); ++l) {
        masks[l].resize(layer_dims[l + 1]);
        for (double& entry : masks[l]) entry = keep_dist(rng) ? scale : 0.0;
    }
    return masks;
}

MlpModel make_mlp(int out_dim, const TrainConfig& config, const Normalizer& normalizer) {
    MlpModel model;
    model.layer_dims.push_back(out_dim + (config.use_quality ? 1 : 0));
    for (int h : config.hidden_dims) model.layer_dims.push_back(h);
    model.layer_dims.push_back(out_dim);
    model.dropout_rate = config.dropout_rate;
    model.normalizer = normalizer;

    std::mt19937_64 rng(seed_mix(config.seed, seed_salt::kWeights));
    for (std::size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        const int rows = model.layer_dims[l + 1];
        const int cols = model.layer_dims[l];
        const double limit = std::sqrt(6.0 / cols);
        std::uniform_real_distribution<double> dist(-limit, limit);
        std::vector<double> w(static_cast<std::size_t>(rows) * cols);
        for (double& entry : w) entry = dist(rng);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(rows, 0.0);
    }
    return model;
}

Normalizer fit_normalizer(const std::vector<DisplacementPair>& pairs, int out_dim,
                          bool use_quality, double margin) {
    std::vector<Measurement> all;
    all.reserve(pairs.size() * 2);
    for (const auto& pair : pairs) {
        all.push_back(pair.m1);
        all.push_back(pair.m2);
    }
    return fit_normalizer(all, out_dim, use_quality, margin);
}

Normalizer fit_normalizer(const std::vector<Measurement>& measurements, int out_dim,
                          bool use_quality, double margin) {
    const int in_dim = out_dim + (use_quality ? 1 : 0);
    Normalizer norm;
    norm.in_min.assign(in_dim, std::numeric_limits<double>::infinity());
    norm.in_max.assign(in_dim, -std::numeric_limits<double>::infinity());

    for (const auto& m : measurements) {
        std::vector<double> v;
        v.push_back(m.position_mm.x);
        if (out_dim >= 2) v.push_back(m.position_mm.y);
        if (out_dim >= 3) v.push_back(m.position_mm.z);
        if (use_quality) v.push_back(m.quality);
        for (int i = 0; i < in_dim; ++i) {
            norm.in_min[i] = std::min(norm.in_min[i], v[i]);
            norm.in_max[i] = std::max(norm.in_max[i], v[i]);
        }
    }

    for (int i = 0; i < in_dim; ++i) {
        double range = norm.in_max[i] - norm.in_min[i];
        if (range < 1e-12) {
            norm.in_min[i] -= 0.5;
            norm.in_max[i] += 0.5;
            range = 1.0;
        }
        norm.in_min[i] -= margin * range;
        norm.in_max[i] += margin * range;
    }
    norm.out_min.assign(norm.in_min.begin(), norm.in_min.begin() + out_dim);
    norm.out_max.assign(norm.in_max.begin(), norm.in_max.begin() + out_dim);
    return norm;
}

double displacement_rmse(const MlpModel& model, const std::vector<DisplacementPair>& pairs) {
    return std::sqrt(displacement_loss(model, pairs));
}

MlpModel train_mlp(const std::vector<DisplacementPair>& train_pairs,
                   const std::vector<DisplacementPair>& val_pairs, int out_dim,
                   const TrainConfig& config) {
    if (train_pairs.empty()) throw std::domain_error("train_mlp: empty training set");
    const Normalizer norm =
        fit_normalizer(train_pairs, out_dim, config.use_quality, config.norm_margin);
    MlpModel model = make_mlp(out_dim, config, norm);
    AdamState state = make_adam_state(model);

    std::mt19937_64 rng(seed_mix(config.seed, seed_salt::kTrain));
    std::vector<DisplacementPair> shuffled = train_pairs;
    const std::vector<DisplacementPair>& checkpoint_pairs =
        val_pairs.empty() ? train_pairs : val_pairs;

    MlpModel best = model;
    double best_rmse = std::numeric_limits<double>::infinity();

    std::vector<DisplacementPair> batch;
    std::vector<PairMasks> batch_masks;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (std::size_t start = 0; start < shuffled.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(shuffled.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.assign(shuffled.begin() + start, shuffled.begin() + stop);
            const std::vector<PairMasks>* masks_ptr = nullptr;
            if (config.dropout_rate > 0.0) {
                batch_masks.resize(batch.size());
                for (auto& pm : batch_masks) {
                    pm.branch1 = sample_dropout_masks(model.layer_dims, config.dropout_rate, rng);
                    pm.branch2 = sample_dropout_masks(model.layer_dims, config.dropout_rate, rng);
                }
                masks_ptr = &batch_masks;
            }
            const Gradients grads = gradients(model, batch, masks_ptr);
            adam_step(model, state, grads, config);
        }
        const double rmse = displacement_rmse(model, checkpoint_pairs);
        if (rmse < best_rmse) {
            best_rmse = rmse;
            best.weights = model.weights;
            best.biases = model.biases;
        }
    }
    model.weights = best.weights;
    model.biases = best.biases;

    if (config.align_output) {
        std::vector<Measurement> anchors;
        anchors.reserve(train_pairs.size() * 2);
        for (const auto& pair : train_pairs) {
            anchors.push_back(pair.m1);
            anchors.push_back(pair.m2);
        }
        align_to_measured(model, anchors);
    }
    return model;
}

std::vector<double> compensate(const MlpModel& model, const Measurement& m) {
    return forward(model, model_input(model, m));
}

PointCompensator make_compensator(const MlpModel& model) {
    return [model](const Measurement& m) { return compensate(model, m); };
}

void align_to_measured(MlpModel& model, const std::vector<Measurement>& measurements) {
    if (measurements.empty()) throw std::domain_error("align_to_measured: no measurements");
    const int d = model.output_dim();
    std::vector<double> from, to;
    from.reserve(measurements.size() * d);
    to.reserve(measurements.size() * d);
    for (const auto& m : measurements) {
        const std::vector<double> out = compensate(model, m);
        const std::vector<double> pos = model_input(model, m);  // positions lead
        for (int k = 0; k < d; ++k) {
            from.push_back(out[k]);
            to.push_back(pos[k]);
        }
    }
    std::vector<double> rotation, translation;
    la::kabsch(from, to, measurements.size(), d, rotation, translation);

    // Fold o -> R o + t into the output layer, keeping the denormalization
    // bounds untouched: with o = m + s.z, the new layer computes
    // z' = S^-1 (R (m + s.z) + t - m).
    std::vector<double>& w = model.weights.back();
    std::vector<double>& b = model.biases.back();
    const std::size_t cols = model.layer_dims[model.layer_dims.size() - 2];
    const auto& norm = model.normalizer;

    std::vector<double> new_w(w.size(), 0.0);
    std::vector<double> new_b(b.size(), 0.0);
    for (int r = 0; r < d; ++r) {
        const double s_r = norm.out_max[r] - norm.out_min[r];
        double bias_acc = translation[r] - norm.out_min[r];
        for (int k = 0; k < d; ++k) {
            const double s_k = norm.out_max[k] - norm.out_min[k];
            const double factor = rotation[r * d + k];
            bias_acc += factor * (norm.out_min[k] + s_k * b[k]);
            for (std::size_t c = 0; c < cols; ++c) {
                new_w[r * cols + c] += factor * s_k * w[k * cols + c] / s_r;
            }
        }
        new_b[r] = bias_acc / s_r;
    }
    w = std::move(new_w);
    b = std::move(new_b);
}

}  // namespace emt
