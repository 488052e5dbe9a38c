// io.hpp
// Dataset CSV persistence, model JSON files and small report writers. All
// numeric output uses shortest round-trip formatting so identical runs give
// byte-identical files.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "emt/distortion.hpp"
#include "emt/geometry.hpp"
#include "emt/mlp.hpp"
#include "emt/navsim.hpp"
#include "emt/poly.hpp"
#include "emt/uncertainty.hpp"

namespace emt {

// I/O failures carry the offending path in the message.
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

// Columns: scenario, point_id, row, col, elevation, rotation, meas_x_mm,
// meas_y_mm, meas_z_mm, quality, gt_x_mm, gt_y_mm, gt_z_mm. Pairs are derived
// on load, not stored. with_group appends a pairing-group column for planar
// acquisitions.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset,
                       const GridSpec& spec, bool with_group = false);

// Reads a dataset CSV; the group column is optional.
Dataset read_dataset_csv(const std::filesystem::path& path, const GridSpec& spec);

void save_mlp_json(const std::filesystem::path& path, const MlpModel& model, std::uint64_t seed,
                   const std::string& config_hash);
MlpModel load_mlp_json(const std::filesystem::path& path);

void save_poly_json(const std::filesystem::path& path, const PolyModel& model, std::uint64_t seed,
                    const std::string& config_hash);
PolyModel load_poly_json(const std::filesystem::path& path);

// row, col, x/y position, sigma and per-dimension stds for every board cell.
void write_sigma_csv(const std::filesystem::path& path, const SigmaField& field,
                     const GridSpec& spec);

void write_trace_csv(const std::filesystem::path& path, const SimResult& result);

void write_pareto_csv(const std::filesystem::path& path, const std::vector<ParetoPoint>& points);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// FNV-1a over the bytes, hex-encoded; stable across runs and platforms.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace emt
