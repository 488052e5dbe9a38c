#include "emt/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace emt {

using nlohmann::json;

std::string format_double(double value) {
    char buffer[32];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IoError("invalid numeric field '" + s + "' in " + path.string());
    }
    return value;
}

int parse_int(const std::string& s, const std::filesystem::path& path) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IoError("invalid integer field '" + s + "' in " + path.string());
    }
    return value;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

json normalizer_to_json(const Normalizer& n) {
    return json{{"in_min", n.in_min},
                {"in_max", n.in_max},
                {"out_min", n.out_min},
                {"out_max", n.out_max}};
}

Normalizer normalizer_from_json(const json& j) {
    Normalizer n;
    n.in_min = j.at("in_min").get<std::vector<double>>();
    n.in_max = j.at("in_max").get<std::vector<double>>();
    n.out_min = j.at("out_min").get<std::vector<double>>();
    n.out_max = j.at("out_max").get<std::vector<double>>();
    return n;
}

json load_json_file(const std::filesystem::path& path, const char* expected_type) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
    if (j.value("type", "") != expected_type) {
        throw std::domain_error("unexpected model type in " + path.string() + ", want " +
                                expected_type);
    }
    return j;
}

}  // namespace

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset,
                       const GridSpec& spec, bool with_group) {
    (void)spec;
    std::ofstream out = open_output(path);
    out << "scenario,point_id,row,col,elevation,rotation,meas_x_mm,meas_y_mm,meas_z_mm,"
           "quality,gt_x_mm,gt_y_mm,gt_z_mm";
    if (with_group) out << ",group";
    out << "\n";
    int point_id = 0;
    for (const auto& m : dataset.measurements) {
        out << dataset.scenario << ',' << point_id++ << ',' << m.gt.cell.row << ','
            << m.gt.cell.col << ',' << m.gt.cell.elevation << ','
            << (m.gt.rotation == Rotation::Deg180 ? 180 : 0) << ','
            << format_double(m.position_mm.x) << ',' << format_double(m.position_mm.y) << ','
            << format_double(m.position_mm.z) << ',' << format_double(m.quality) << ','
            << format_double(m.gt.position_mm.x) << ',' << format_double(m.gt.position_mm.y)
            << ',' << format_double(m.gt.position_mm.z);
        if (with_group) out << ',' << m.group;
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path, const GridSpec& spec) {
    (void)spec;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty dataset file: " + path.string());
    const std::vector<std::string> header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* required :
         {"scenario", "row", "col", "elevation", "rotation", "meas_x_mm", "meas_y_mm",
          "meas_z_mm", "quality", "gt_x_mm", "gt_y_mm", "gt_z_mm"}) {
        if (col.find(required) == col.end()) {
            throw IoError(std::string("missing column '") + required + "' in " + path.string());
        }
    }
    const bool has_group = col.find("group") != col.end();

    Dataset dataset;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() < header.size()) {
            throw IoError("short row in " + path.string());
        }
        Measurement m;
        dataset.scenario = f[col["scenario"]];
        m.gt.cell.row = parse_int(f[col["row"]], path);
        m.gt.cell.col = parse_int(f[col["col"]], path);
        m.gt.cell.elevation = parse_int(f[col["elevation"]], path);
        m.gt.rotation =
            parse_int(f[col["rotation"]], path) == 180 ? Rotation::Deg180 : Rotation::Deg0;
        m.position_mm.x = parse_double(f[col["meas_x_mm"]], path);
        m.position_mm.y = parse_double(f[col["meas_y_mm"]], path);
        m.position_mm.z = parse_double(f[col["meas_z_mm"]], path);
        m.quality = parse_double(f[col["quality"]], path);
        m.gt.position_mm.x = parse_double(f[col["gt_x_mm"]], path);
        m.gt.position_mm.y = parse_double(f[col["gt_y_mm"]], path);
        m.gt.position_mm.z = parse_double(f[col["gt_z_mm"]], path);
        if (has_group) m.group = parse_int(f[col["group"]], path);
        dataset.measurements.push_back(std::move(m));
    }
    return dataset;
}

void save_mlp_json(const std::filesystem::path& path, const MlpModel& model, std::uint64_t seed,
                   const std::string& config_hash) {
    json j;
    j["type"] = "mlp";
    j["layer_dims"] = model.layer_dims;
    j["weights"] = model.weights;
    j["biases"] = model.biases;
    j["leaky_slope"] = model.leaky_slope;
    j["dropout_rate"] = model.dropout_rate;
    j["normalizer"] = normalizer_to_json(model.normalizer);
    j["meta"] = json{{"seed", seed}, {"config_hash", config_hash}};
    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

MlpModel load_mlp_json(const std::filesystem::path& path) {
    const json j = load_json_file(path, "mlp");
    MlpModel model;
    try {
        model.layer_dims = j.at("layer_dims").get<std::vector<int>>();
        model.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        model.biases = j.at("biases").get<std::vector<std::vector<double>>>();
        model.leaky_slope = j.at("leaky_slope").get<double>();
        model.dropout_rate = j.at("dropout_rate").get<double>();
        model.normalizer = normalizer_from_json(j.at("normalizer"));
    } catch (const json::exception& e) {
        throw IoError("invalid model file " + path.string() + ": " + e.what());
    }
    return model;
}

void save_poly_json(const std::filesystem::path& path, const PolyModel& model, std::uint64_t seed,
                    const std::string& config_hash) {
    json j;
    j["type"] = "poly";
    j["degree"] = model.degree;
    j["n_inputs"] = model.n_inputs;
    j["coefficients"] = model.coefficients;
    j["normalizer"] = normalizer_to_json(model.normalizer);
    j["meta"] = json{{"seed", seed}, {"config_hash", config_hash}};
    std::ofstream out = open_output(path);
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

PolyModel load_poly_json(const std::filesystem::path& path) {
    const json j = load_json_file(path, "poly");
    PolyModel model;
    try {
        model.degree = j.at("degree").get<int>();
        model.n_inputs = j.at("n_inputs").get<int>();
        model.coefficients = j.at("coefficients").get<std::vector<std::vector<double>>>();
        model.normalizer = normalizer_from_json(j.at("normalizer"));
    } catch (const json::exception& e) {
        throw IoError("invalid model file " + path.string() + ": " + e.what());
    }
    return model;
}

void write_sigma_csv(const std::filesystem::path& path, const SigmaField& field,
                     const GridSpec& spec) {
    std::ofstream out = open_output(path);
    out << "row,col,x_mm,y_mm,sigma_mm,std_x_mm,std_y_mm\n";
    for (int row = 0; row < field.n_rows; ++row) {
        for (int c = 0; c < field.n_cols; ++c) {
            const UncertaintyEstimate& e = field.at(row, c);
            out << row << ',' << c << ',' << format_double(row * spec.pitch_mm) << ','
                << format_double(c * spec.pitch_mm) << ',' << format_double(e.sigma_mm) << ','
                << format_double(e.per_dim_std_mm.size() > 0 ? e.per_dim_std_mm[0] : 0.0) << ','
                << format_double(e.per_dim_std_mm.size() > 1 ? e.per_dim_std_mm[1] : 0.0)
                << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_trace_csv(const std::filesystem::path& path, const SimResult& result) {
    std::ofstream out = open_output(path);
    out << "segment,traveled_mm,error_mm,sigma_accum_mm,recalibrated\n";
    for (std::size_t i = 0; i < result.segments.size(); ++i) {
        const SegmentRecord& s = result.segments[i];
        out << i << ',' << format_double(s.traveled_mm) << ',' << format_double(s.error_mm) << ','
            << format_double(s.sigma_accum_mm) << ',' << (s.recalibrated ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_pareto_csv(const std::filesystem::path& path, const std::vector<ParetoPoint>& points) {
    std::ofstream out = open_output(path);
    out << "family,parameter_mm,recal_count,mean_error_mm\n";
    for (const auto& p : points) {
        const bool adaptive = p.policy.kind == RecalPolicy::Kind::Adaptive;
        out << (adaptive ? "adaptive" : "static") << ','
            << format_double(adaptive ? p.policy.tau_mm : p.policy.interval_mm) << ','
            << p.recal_count << ',' << format_double(p.mean_error_mm) << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out = open_output(path);
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buffer);
}

}  // namespace emt
