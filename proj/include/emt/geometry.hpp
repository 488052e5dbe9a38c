// geometry.hpp
// Measurement grid model: calibrated phantom cells on a stud board,
// displacement pair construction and neighborhood error estimates.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace emt {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
};

double distance(const Vec3& a, const Vec3& b);

enum class Rotation { Deg0, Deg180 };

struct CellIndex {
    int row = 0;
    int col = 0;
    int elevation = 0;

    bool operator==(const CellIndex&) const = default;
};

// Board layout: cell (row, col) maps to x = row * pitch, y = col * pitch,
// z = elevation * elevation_step. calibrated_cells are the phantom positions
// that carry ground truth.
struct GridSpec {
    double pitch_mm = 8.0;
    double elevation_step_mm = 9.6;
    int n_rows = 32;
    int n_cols = 32;
    int n_elevations = 3;
    std::vector<std::pair<int, int>> calibrated_cells;

    bool in_bounds(int row, int col) const {
        return row >= 0 && row < n_rows && col >= 0 && col < n_cols;
    }
};

// Default phantom layout: ten spread cells, mirroring the sparse calibrated
// pattern of the physical board. Centered on a 32x32 board.
GridSpec default_grid_spec();

struct GroundTruthPoint {
    CellIndex cell;
    Rotation rotation = Rotation::Deg0;
    Vec3 position_mm;
};

struct Measurement {
    Vec3 position_mm;
    double quality = 0.0;
    GroundTruthPoint gt;
    // Pairing group (e.g. board alignment for planar acquisitions). Pairs are
    // only formed between measurements sharing (group, rotation).
    int group = 0;
};

struct DisplacementPair {
    Measurement m1;
    Measurement m2;
    double gt_distance_mm = 0.0;
};

// Compensators map a measurement to a compensated position (2 or 3 dims).
using PointCompensator = std::function<std::vector<double>(const Measurement&)>;

// Ground-truth board position of a cell. Deg180 rotates the horizontal
// coordinates by 180 degrees about the board center; elevation is unaffected.
// Throws std::domain_error for out-of-bounds cells.
Vec3 grid_position(const GridSpec& spec, const CellIndex& cell, Rotation rotation);

// All unordered pairs within each (group, rotation) bucket. Ground-truth
// distance comes from the ground-truth positions. Groups with fewer than two
// points contribute nothing.
std::vector<DisplacementPair> build_displacement_pairs(const std::vector<Measurement>& points);

// Signed displacement error ||c(x2) - c(x1)|| - y; identity compensator when
// none is given.
double displacement_error(const DisplacementPair& pair, const PointCompensator* compensator = nullptr);

// Root-mean-square of displacement errors over a pair set.
double displacement_rmse(const std::vector<DisplacementPair>& pairs,
                         const PointCompensator* compensator = nullptr);

// Largest |displacement error| over a pair set.
double max_displacement_error(const std::vector<DisplacementPair>& pairs,
                              const PointCompensator* compensator = nullptr);

// Cells with Chebyshev distance <= radius from center, center excluded,
// clipped to the board bounds.
std::vector<std::pair<int, int>> moore_neighbors(std::pair<int, int> cell, int radius,
                                                 std::pair<int, int> bounds);

// Mean over Moore neighbors of |measured distance - ground-truth distance|.
// positions/gt are dense row-major grids of size n_rows*n_cols; entries
// without data are nullopt. Throws std::domain_error when no neighbor has
// data.
double absolute_error_estimate(std::pair<int, int> cell,
                               const std::vector<std::optional<Vec3>>& positions,
                               const std::vector<std::optional<Vec3>>& gt,
                               std::pair<int, int> bounds, int radius);

}  // namespace emt
