// experiments.hpp
// Experiment configuration and the drivers behind the CLI subcommands:
// dataset generation, online/offline compensation runs, the planar
// uncertainty study and the hybrid-navigation simulation.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emt/distortion.hpp"
#include "emt/geometry.hpp"
#include "emt/mlp.hpp"
#include "emt/navsim.hpp"
#include "emt/poly.hpp"
#include "emt/uncertainty.hpp"

namespace emt {

struct ScenarioConfig {
    std::string name;
    DistortionConfig distortion;
};

struct ExperimentConfig {
    GridSpec grid;

    // 3D scenario suite and its role assignment.
    std::vector<ScenarioConfig> scenarios;
    std::vector<std::string> train_scenarios;
    std::string validation_scenario;
    std::vector<std::string> eval_scenarios;

    // Planar full-board study: per-alignment fields, a clean validation
    // acquisition, phantom placement offsets and the field used for the dense
    // board sweep.
    std::vector<ScenarioConfig> planar_scenarios;
    ScenarioConfig planar_validation;
    std::string board_scenario;
    std::vector<std::pair<int, int>> placement_offsets;

    // Model hyperparameters.
    TrainConfig ann;         // spatial model, three hidden layers
    TrainConfig planar_ann;  // planar model, two hidden layers, dropout
    int poly_degree = 3;
    bool poly_quality = false;

    // Offline split fractions over calibrated cells.
    double split_train = 0.45;
    double split_val = 0.05;

    int median_samples = 500;
    int mc_sample_count = 3000;
    double mc_dropout_rate = 0.1;
    int moore_radius = 3;

    double path_length_mm = 219.0;
    std::vector<double> tau_sweep;
    std::vector<double> interval_sweep;
    std::pair<int, int> seen_path_start{2, 16};
    std::pair<int, int> unseen_path_start{2, 28};

    std::uint64_t seed = 1;

    const ScenarioConfig& scenario(const std::string& name) const;
    const ScenarioConfig& planar_scenario(const std::string& name) const;
};

// Nine-scenario desk-scale suite mirroring the hardware acquisition layout:
// four near-field training distances, one clean validation setup and four
// held-out fields, plus six planar alignments and a planar validation.
ExperimentConfig default_experiment_config();

ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

// All datasets of one experiment, generated deterministically from the seed.
struct DatasetStore {
    std::map<std::string, Dataset> scenarios;
    std::map<std::string, Dataset> planar;  // alignments plus validation
    Dataset board;
};

DatasetStore generate_datasets(const ExperimentConfig& config);
void write_datasets(const DatasetStore& store, const ExperimentConfig& config,
                    const std::filesystem::path& out_dir);
DatasetStore load_datasets(const ExperimentConfig& config, const std::filesystem::path& dir);

struct ScenarioMetrics {
    std::string scenario;
    std::size_t n_pairs = 0;
    double raw_rmse_mm = 0.0;
    double comp_rmse_mm = 0.0;
    double reduction_pct = 0.0;
    double raw_max_mm = 0.0;
    double comp_max_mm = 0.0;
};

ScenarioMetrics evaluate_pairs(const std::string& name, const std::vector<DisplacementPair>& pairs,
                               const PointCompensator& compensator);

// Pools pair sets and reports the aggregate raw/compensated RMSE.
ScenarioMetrics pooled_metrics(const std::string& name,
                               const std::vector<std::vector<DisplacementPair>>& pair_sets,
                               const PointCompensator& compensator);

enum class ModelKind { Ann, Poly };

struct TrainedModel {
    ModelKind kind = ModelKind::Ann;
    MlpModel ann;
    PolyModel poly;

    PointCompensator compensator() const;
};

// Trains on the pooled training scenarios, validating on the clean scenario.
TrainedModel train_online_model(const ExperimentConfig& config, const DatasetStore& store,
                                ModelKind kind, bool use_quality);

struct OnlineReport {
    bool use_quality = false;
    ModelKind kind = ModelKind::Ann;
    std::vector<ScenarioMetrics> held_out;
    ScenarioMetrics pooled;
};

OnlineReport evaluate_online_model(const ExperimentConfig& config, const DatasetStore& store,
                                   const TrainedModel& model, bool use_quality);

// Spatially disjoint cell groups; train gets floor(f_train n), validation at
// least one cell, the rest is test.
struct CellSplit {
    std::vector<std::pair<int, int>> train;
    std::vector<std::pair<int, int>> val;
    std::vector<std::pair<int, int>> test;
};

CellSplit split_cells(const std::vector<std::pair<int, int>>& cells, double f_train, double f_val,
                      std::uint64_t seed);

// Keeps only measurements on the listed cells.
std::vector<Measurement> filter_by_cells(const std::vector<Measurement>& measurements,
                                         const std::vector<std::pair<int, int>>& cells);

struct OfflineOutcome {
    std::string scenario;
    CellSplit split;
    std::size_t n_train_pairs = 0;
    std::size_t n_test_pairs = 0;
    ScenarioMetrics ann;
    ScenarioMetrics poly;
    TrainedModel ann_model;
    TrainedModel poly_model;
};

// Known-distortion run: split one scenario by cell groups, train and test
// inside it.
OfflineOutcome run_offline_scenario(const ExperimentConfig& config, const DatasetStore& store,
                                    const std::string& scenario_name);

struct PlanarStudy {
    MlpModel model;
    SigmaField sigma;
    // Per board cell (row-major): Moore-neighborhood absolute error of the
    // compensated board and distance to the nearest training point.
    std::vector<double> moore_error_mm;
    std::vector<double> nearest_train_mm;
    std::vector<std::vector<double>> training_points;
    LinearFit sigma_vs_error;
    LinearFit sigma_vs_distance;
    LinearFit error_vs_distance;
};

PlanarStudy run_planar_study(const ExperimentConfig& config, const DatasetStore& store);

struct SimStudy {
    Trajectory seen_path;
    Trajectory unseen_path;
    SimResult seen_trace;    // adaptive policy at tau = 2 mm
    SimResult unseen_trace;
    std::vector<ParetoPoint> seen_sweep;
    std::vector<ParetoPoint> unseen_sweep;
};

SimStudy run_sim_study(const ExperimentConfig& config, const DatasetStore& store,
                       const PlanarStudy& planar);

// Sigma lookup over a precomputed field, keyed by board cell.
SigmaAt make_sigma_lookup(const SigmaField& field);

}  // namespace emt
