// navsim.hpp
// Simulated guidewire run over the board: per-segment error and accumulated
// uncertainty, recalibration policies and the radiation-error sweep.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "emt/distortion.hpp"
#include "emt/geometry.hpp"

namespace emt {

// Contiguous path over measured grid points; segment k runs from node k to
// node k+1. total_length_mm is the sum of ground-truth segment lengths.
struct Trajectory {
    std::vector<Measurement> nodes;
    double total_length_mm = 0.0;

    std::size_t segment_count() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

struct RecalPolicy {
    enum class Kind { Adaptive, Static };
    Kind kind = Kind::Adaptive;
    double tau_mm = 0.0;        // adaptive: recalibrate when sigma accum > tau
    double interval_mm = 0.0;   // static: recalibrate every interval of travel

    static RecalPolicy adaptive(double tau_mm);
    static RecalPolicy fixed_interval(double interval_mm);
};

struct SegmentRecord {
    double traveled_mm = 0.0;      // cumulative ground-truth distance
    double error_mm = 0.0;         // accumulated |segment length error| since recal
    double sigma_accum_mm = 0.0;   // root-sum-square of sigmas since recal
    bool recalibrated = false;
};

struct SimResult {
    std::vector<SegmentRecord> segments;
    int recal_count = 0;
    double mean_error_mm = 0.0;
    double max_error_mm = 0.0;
};

// Root-sum-square accumulation of per-segment sigmas.
double accumulate_sigma(const std::vector<double>& sigmas_since_recal);

// Per-node model uncertainty lookup.
using SigmaAt = std::function<double(const Measurement&)>;

// Builds a contiguous monotone path with seeded lateral deviations over the
// measured board cells, starting near (start_row, start_col). Total
// ground-truth length lands within one pitch of target_length_mm. Throws
// std::domain_error when the dataset cannot cover the request.
Trajectory build_path(const Dataset& board, const GridSpec& spec, double target_length_mm,
                      std::uint64_t seed, int start_row = -1, int start_col = -1);

// Walks the segments, accumulating error and uncertainty, triggering
// recalibration per policy and resetting both accumulators on each event.
SimResult simulate(const Trajectory& traj, const PointCompensator& compensator,
                   const SigmaAt& sigma_at, const RecalPolicy& policy);

struct ParetoPoint {
    RecalPolicy policy;
    int recal_count = 0;
    double mean_error_mm = 0.0;
};

// Runs simulate for every policy value in both families.
std::vector<ParetoPoint> pareto_sweep(const Trajectory& traj, const PointCompensator& compensator,
                                      const SigmaAt& sigma_at,
                                      const std::vector<double>& tau_values,
                                      const std::vector<double>& interval_values);

// True when a dominates b: no worse in both objectives, better in one.
bool dominates(const ParetoPoint& a, const ParetoPoint& b);

// Number of sweep points strictly dominating the point at `index`.
int domination_count(const std::vector<ParetoPoint>& points, std::size_t index);

}  // namespace emt
