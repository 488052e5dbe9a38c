#include "emt/navsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "emt/rng.hpp"

namespace emt {

RecalPolicy RecalPolicy::adaptive(double tau_mm) {
    RecalPolicy p;
    p.kind = Kind::Adaptive;
    p.tau_mm = tau_mm;
    return p;
}

RecalPolicy RecalPolicy::fixed_interval(double interval_mm) {
    RecalPolicy p;
    p.kind = Kind::Static;
    p.interval_mm = interval_mm;
    return p;
}

double accumulate_sigma(const std::vector<double>& sigmas_since_recal) {
    double sum_sq = 0.0;
    for (double s : sigmas_since_recal) sum_sq += s * s;
    return std::sqrt(sum_sq);
}

Trajectory build_path(const Dataset& board, const GridSpec& spec, double target_length_mm,
                      std::uint64_t seed, int start_row, int start_col) {
    Trajectory traj;
    if (target_length_mm <= 0.0) return traj;

    const int n_moves = static_cast<int>(std::llround(target_length_mm / spec.pitch_mm));
    if (n_moves == 0) return traj;

    if (start_row < 0) start_row = 2;
    if (start_col < 0) start_col = spec.n_cols / 2;
    if (start_row + n_moves > spec.n_rows - 1) {
        throw std::domain_error("build_path: board too small for requested length");
    }

    std::map<std::pair<int, int>, const Measurement*> by_cell;
    for (const auto& m : board.measurements) {
        by_cell[{m.gt.cell.row, m.gt.cell.col}] = &m;
    }
    const auto node_at = [&](int row, int col) -> const Measurement& {
        const auto it = by_cell.find({row, col});
        if (it == by_cell.end()) {
            throw std::domain_error("build_path: dataset does not cover the path");
        }
        return *it->second;
    };

    // Monotone principal direction (+row) with seeded lateral deviations
    // inside a narrow column band, resembling a vessel course.
    std::mt19937_64 rng(seed_mix(seed, seed_salt::kPath));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int band = 3;
    const int col_lo = std::max(0, start_col - band);
    const int col_hi = std::min(spec.n_cols - 1, start_col + band);

    int row = start_row;
    int col = start_col;
    int last_lateral = 0;
    traj.nodes.push_back(node_at(row, col));
    for (int move = 0; move < n_moves; ++move) {
        bool lateral = unit(rng) < 0.3;
        int dir = unit(rng) < 0.5 ? -1 : 1;
        if (dir == -last_lateral) dir = -dir;  // no immediate backtracking
        if (col + dir < col_lo || col + dir > col_hi) dir = -dir;
        if (col + dir < col_lo || col + dir > col_hi) lateral = false;
        if (lateral) {
            col += dir;
            last_lateral = dir;
        } else {
            ++row;
            last_lateral = 0;
        }
        const Measurement& node = node_at(row, col);
        traj.total_length_mm +=
            distance(traj.nodes.back().gt.position_mm, node.gt.position_mm);
        traj.nodes.push_back(node);
    }
    return traj;
}

SimResult simulate(const Trajectory& traj, const PointCompensator& compensator,
                   const SigmaAt& sigma_at, const RecalPolicy& policy) {
    SimResult result;
    if (traj.nodes.size() < 2) return result;

    double error_accum = 0.0;
    double traveled_total = 0.0;
    double traveled_since_recal = 0.0;
    std::vector<double> sigmas;

    std::vector<double> prev_comp = compensator ? compensator(traj.nodes.front())
                                                : std::vector<double>{};
    for (std::size_t k = 1; k < traj.nodes.size(); ++k) {
        const Measurement& a = traj.nodes[k - 1];
        const Measurement& b = traj.nodes[k];
        const double gt_len = distance(a.gt.position_mm, b.gt.position_mm);

        double meas_len = 0.0;
        if (compensator) {
            const std::vector<double> comp = compensator(b);
            double sq = 0.0;
            for (std::size_t d = 0; d < comp.size(); ++d) {
                const double diff = comp[d] - prev_comp[d];
                sq += diff * diff;
            }
            meas_len = std::sqrt(sq);
            prev_comp = comp;
        } else {
            meas_len = distance(a.position_mm, b.position_mm);
        }

        traveled_total += gt_len;
        traveled_since_recal += gt_len;
        error_accum += std::abs(meas_len - gt_len);
        sigmas.push_back(sigma_at ? sigma_at(b) : 0.0);
        const double sigma_accum = accumulate_sigma(sigmas);

        bool recalibrate = false;
        if (policy.kind == RecalPolicy::Kind::Adaptive) {
            recalibrate = sigma_accum > policy.tau_mm;
        } else {
            recalibrate = traveled_since_recal >= policy.interval_mm;
        }

        result.segments.push_back({traveled_total, error_accum, sigma_accum, recalibrate});
        if (recalibrate) {
            ++result.recal_count;
            error_accum = 0.0;
            sigmas.clear();
            traveled_since_recal = 0.0;
        }
    }

    double sum = 0.0;
    for (const auto& seg : result.segments) {
        sum += seg.error_mm;
        result.max_error_mm = std::max(result.max_error_mm, seg.error_mm);
    }
    result.mean_error_mm = sum / static_cast<double>(result.segments.size());
    return result;
}

std::vector<ParetoPoint> pareto_sweep(const Trajectory& traj, const PointCompensator& compensator,
                                      const SigmaAt& sigma_at,
                                      const std::vector<double>& tau_values,
                                      const std::vector<double>& interval_values) {
    if (tau_values.empty() && interval_values.empty()) {
        throw std::domain_error("pareto_sweep: empty sweep lists");
    }
    std::vector<ParetoPoint> points;
    points.reserve(tau_values.size() + interval_values.size());
    for (double tau : tau_values) {
        const RecalPolicy policy = RecalPolicy::adaptive(tau);
        const SimResult r = simulate(traj, compensator, sigma_at, policy);
        points.push_back({policy, r.recal_count, r.mean_error_mm});
    }
    for (double interval : interval_values) {
        const RecalPolicy policy = RecalPolicy::fixed_interval(interval);
        const SimResult r = simulate(traj, compensator, sigma_at, policy);
        points.push_back({policy, r.recal_count, r.mean_error_mm});
    }
    return points;
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
    const bool no_worse = a.recal_count <= b.recal_count && a.mean_error_mm <= b.mean_error_mm;
    const bool better = a.recal_count < b.recal_count || a.mean_error_mm < b.mean_error_mm;
    return no_worse && better;
}

int domination_count(const std::vector<ParetoPoint>& points, std::size_t index) {
    int count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i != index && dominates(points[i], points[index])) ++count;
    }
    return count;
}

}  // namespace emt
