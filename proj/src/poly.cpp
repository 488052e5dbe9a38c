#include "emt/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "emt/linalg.hpp"
#include "emt/rng.hpp"

namespace emt {

namespace {

void emit_exponents(int n_inputs, int remaining, int index, std::vector<int>& current,
                    std::vector<std::vector<int>>& out) {
    if (index == n_inputs - 1) {
        current[index] = remaining;
        out.push_back(current);
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        current[index] = a;
        emit_exponents(n_inputs, remaining - a, index + 1, current, out);
    }
}

std::vector<double> poly_input(const PolyModel& model, const Measurement& m) {
    std::vector<double> input;
    input.reserve(model.n_inputs);
    const int pos_dims = model.output_dim();
    input.push_back(m.position_mm.x);
    if (pos_dims >= 2) input.push_back(m.position_mm.y);
    if (pos_dims >= 3) input.push_back(m.position_mm.z);
    if (model.uses_quality()) input.push_back(m.quality);
    return input;
}

std::vector<double> compensate_normalized(const PolyModel& model,
                                          const std::vector<double>& features) {
    const int out_dim = model.output_dim();
    std::vector<double> z(out_dim, 0.0);
    for (int k = 0; k < out_dim; ++k) {
        const std::vector<double>& coeff = model.coefficients[k];
        double acc = 0.0;
        for (std::size_t j = 0; j < coeff.size(); ++j) acc += coeff[j] * features[j];
        z[k] = acc;
    }
    return z;
}

}  // namespace

std::vector<std::vector<int>> monomial_exponents(int n_inputs, int degree) {
    if (degree < 0) throw std::domain_error("monomial_exponents: negative degree");
    std::vector<std::vector<int>> out;
    std::vector<int> current(n_inputs, 0);
    for (int total = 0; total <= degree; ++total) {
        emit_exponents(n_inputs, total, 0, current, out);
    }
    return out;
}

std::vector<double> poly_features(const std::vector<double>& input, int degree) {
    const int n = static_cast<int>(input.size());
    const auto exponents = monomial_exponents(n, degree);
    // Power table: powers[i][e] = input[i]^e.
    std::vector<std::vector<double>> powers(n, std::vector<double>(degree + 1, 1.0));
    for (int i = 0; i < n; ++i) {
        for (int e = 1; e <= degree; ++e) powers[i][e] = powers[i][e - 1] * input[i];
    }
    std::vector<double> features(exponents.size());
    for (std::size_t j = 0; j < exponents.size(); ++j) {
        double value = 1.0;
        for (int i = 0; i < n; ++i) value *= powers[i][exponents[j][i]];
        features[j] = value;
    }
    return features;
}

std::size_t poly_feature_count(int n_inputs, int degree) {
    // C(degree + n_inputs, n_inputs)
    std::size_t count = 1;
    for (int i = 1; i <= n_inputs; ++i) {
        count = count * static_cast<std::size_t>(degree + i) / static_cast<std::size_t>(i);
    }
    return count;
}

PolyModel make_identity_poly(int out_dim, int degree, bool use_quality,
                             const Normalizer& normalizer) {
    PolyModel model;
    model.degree = degree;
    model.n_inputs = out_dim + (use_quality ? 1 : 0);
    model.normalizer = normalizer;
    const auto exponents = monomial_exponents(model.n_inputs, degree);
    model.coefficients.assign(out_dim, std::vector<double>(exponents.size(), 0.0));
    for (int k = 0; k < out_dim; ++k) {
        for (std::size_t j = 0; j < exponents.size(); ++j) {
            int total = 0;
            for (int e : exponents[j]) total += e;
            if (total == 1 && exponents[j][k] == 1) {
                model.coefficients[k][j] = 1.0;
                break;
            }
        }
    }
    return model;
}

std::vector<double> poly_compensate(const PolyModel& model, const Measurement& m) {
    const std::vector<double> z = model.normalizer.normalize_in(poly_input(model, m));
    const std::vector<double> features = poly_features(z, model.degree);
    return model.normalizer.denormalize_out(compensate_normalized(model, features));
}

PointCompensator make_poly_compensator(const PolyModel& model) {
    return [model](const Measurement& m) { return poly_compensate(model, m); };
}

double poly_displacement_loss(const PolyModel& model, const std::vector<DisplacementPair>& batch) {
    if (batch.empty()) throw std::domain_error("poly_displacement_loss: empty batch");
    double total = 0.0;
    for (const auto& pair : batch) {
        const std::vector<double> o1 = poly_compensate(model, pair.m1);
        const std::vector<double> o2 = poly_compensate(model, pair.m2);
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

PolyModel train_poly(const std::vector<DisplacementPair>& train_pairs,
                     const std::vector<DisplacementPair>& val_pairs, int out_dim, int degree,
                     const TrainConfig& config) {
    if (train_pairs.empty()) throw std::domain_error("train_poly: empty training set");
    const Normalizer norm =
        fit_normalizer(train_pairs, out_dim, config.use_quality, config.norm_margin);
    PolyModel model = make_identity_poly(out_dim, degree, config.use_quality, norm);

    const std::size_t n_features = model.coefficients[0].size();
    const std::size_t n_params = n_features * static_cast<std::size_t>(out_dim);
    std::vector<double> m_state(n_params, 0.0), v_state(n_params, 0.0);
    long step = 0;

    std::mt19937_64 rng(seed_mix(config.seed, seed_salt::kTrain));
    std::vector<DisplacementPair> shuffled = train_pairs;
    const std::vector<DisplacementPair>& checkpoint_pairs =
        val_pairs.empty() ? train_pairs : val_pairs;

    PolyModel best = model;
    double best_rmse = std::numeric_limits<double>::infinity();

    std::vector<double> grad(n_params, 0.0);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (std::size_t start = 0; start < shuffled.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(shuffled.size(), start + static_cast<std::size_t>(config.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            const double inv_batch = 1.0 / static_cast<double>(stop - start);

            for (std::size_t i = start; i < stop; ++i) {
                const DisplacementPair& pair = shuffled[i];
                const std::vector<double> z1 =
                    model.normalizer.normalize_in(poly_input(model, pair.m1));
                const std::vector<double> z2 =
                    model.normalizer.normalize_in(poly_input(model, pair.m2));
                const std::vector<double> f1 = poly_features(z1, model.degree);
                const std::vector<double> f2 = poly_features(z2, model.degree);
                const std::vector<double> o1 =
                    model.normalizer.denormalize_out(compensate_normalized(model, f1));
                const std::vector<double> o2 =
                    model.normalizer.denormalize_out(compensate_normalized(model, f2));

                double sq = 0.0;
                std::vector<double> diff(out_dim);
                for (int k = 0; k < out_dim; ++k) {
                    diff[k] = o2[k] - o1[k];
                    sq += diff[k] * diff[k];
                }
                const double dist = std::sqrt(sq);
                if (dist == 0.0) continue;
                const double e = dist - pair.gt_distance_mm;
                const double scale = 2.0 * e / dist * inv_batch;
                for (int k = 0; k < out_dim; ++k) {
                    const double s_k =
                        model.normalizer.out_max[k] - model.normalizer.out_min[k];
                    const double d_ok = scale * diff[k] * s_k;
                    double* gk = grad.data() + static_cast<std::size_t>(k) * n_features;
                    for (std::size_t j = 0; j < n_features; ++j) {
                        gk[j] += d_ok * (f2[j] - f1[j]);
                    }
                }
            }

            ++step;
            const double bias1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
            const double bias2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
            for (std::size_t p = 0; p < n_params; ++p) {
                m_state[p] = config.adam_beta1 * m_state[p] + (1.0 - config.adam_beta1) * grad[p];
                v_state[p] =
                    config.adam_beta2 * v_state[p] + (1.0 - config.adam_beta2) * grad[p] * grad[p];
                const double m_hat = m_state[p] / bias1;
                const double v_hat = v_state[p] / bias2;
                model.coefficients[p / n_features][p % n_features] -=
                    config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
            }
        }
        const double rmse = std::sqrt(poly_displacement_loss(model, checkpoint_pairs));
        if (rmse < best_rmse) {
            best_rmse = rmse;
            best.coefficients = model.coefficients;
        }
    }
    model.coefficients = best.coefficients;
    return model;
}

PolyModel fit_poly_absolute(const std::vector<Measurement>& measurements, int out_dim, int degree,
                            bool use_quality, double norm_margin) {
    if (measurements.empty()) throw std::domain_error("fit_poly_absolute: no measurements");
    const Normalizer norm = fit_normalizer(measurements, out_dim, use_quality, norm_margin);
    PolyModel model = make_identity_poly(out_dim, degree, use_quality, norm);
    const std::size_t n_features = model.coefficients[0].size();

    // Normal equations per output dimension on normalized targets.
    std::vector<double> xtx(n_features * n_features, 0.0);
    std::vector<std::vector<double>> xty(out_dim, std::vector<double>(n_features, 0.0));
    for (const auto& m : measurements) {
        const std::vector<double> z = norm.normalize_in(poly_input(model, m));
        const std::vector<double> f = poly_features(z, degree);
        std::vector<double> target = {m.gt.position_mm.x, m.gt.position_mm.y,
                                      m.gt.position_mm.z};
        target.resize(out_dim);
        const std::vector<double> zt = norm.normalize_out(target);
        for (std::size_t r = 0; r < n_features; ++r) {
            for (std::size_t c = 0; c < n_features; ++c) xtx[r * n_features + c] += f[r] * f[c];
            for (int k = 0; k < out_dim; ++k) xty[k][r] += f[r] * zt[k];
        }
    }
    for (int k = 0; k < out_dim; ++k) {
        model.coefficients[k] = la::gauss_solve(xtx, xty[k]);
    }
    return model;
}

}  // namespace emt
