#include "edmrec/io.hpp"

#include "edmrec/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace edmrec {

using nlohmann::json;

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("failed writing " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Little-endian binary scribes; the host is assumed little-endian
// (checked at load by the magic bytes round-tripping).
template <typename T>
void append_raw(std::string& out, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

struct BinaryReader {
    const std::string& data;
    size_t offset = 0;

    template <typename T>
    T take() {
        if (offset + sizeof(T) > data.size())
            throw std::runtime_error("truncated binary file");
        T value;
        std::memcpy(&value, data.data() + offset, sizeof(T));
        offset += sizeof(T);
        return value;
    }

    std::string take_bytes(size_t count) {
        if (offset + count > data.size()) throw std::runtime_error("truncated binary file");
        std::string out = data.substr(offset, count);
        offset += count;
        return out;
    }
};

void append_matrix(std::string& out, const Eigen::MatrixXd& m) {
    append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    out.append(reinterpret_cast<const char*>(m.data()),
               static_cast<size_t>(m.size()) * sizeof(double));
}

Eigen::MatrixXd take_matrix(BinaryReader& reader) {
    const auto rows = reader.take<std::uint32_t>();
    const auto cols = reader.take<std::uint32_t>();
    Eigen::MatrixXd m(rows, cols);
    const std::string bytes = reader.take_bytes(static_cast<size_t>(m.size()) * sizeof(double));
    std::memcpy(m.data(), bytes.data(), bytes.size());
    return m;
}

void append_vector(std::string& out, const Eigen::VectorXd& v) {
    append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
    out.append(reinterpret_cast<const char*>(v.data()),
               static_cast<size_t>(v.size()) * sizeof(double));
}

Eigen::VectorXd take_vector(BinaryReader& reader) {
    const auto size = reader.take<std::uint32_t>();
    Eigen::VectorXd v(size);
    const std::string bytes = reader.take_bytes(static_cast<size_t>(size) * sizeof(double));
    std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
}

json pose_to_json(const Pose& pose) {
    json rows = json::array();
    for (int i = 0; i < pose.joint_count(); ++i) {
        json row = json::array();
        for (int d = 0; d < pose.dims(); ++d) row.push_back(pose.joints(i, d));
        rows.push_back(std::move(row));
    }
    return rows;
}

Pose pose_from_json(const json& rows, int dims, int line) {
    if (!rows.is_array() || rows.size() != kJointCount)
        throw std::runtime_error("line " + std::to_string(line) + ": expected " +
                                 std::to_string(kJointCount) + " joints, got " +
                                 std::to_string(rows.is_array() ? rows.size() : 0));
    Pose pose;
    pose.joints.resize(kJointCount, dims);
    for (int i = 0; i < kJointCount; ++i) {
        const json& row = rows[i];
        if (!row.is_array() || static_cast<int>(row.size()) != dims)
            throw std::runtime_error("line " + std::to_string(line) + ": joint " +
                                     std::to_string(i) + " needs " + std::to_string(dims) +
                                     " coordinates");
        for (int d = 0; d < dims; ++d) {
            if (!row[d].is_number())
                throw std::runtime_error("line " + std::to_string(line) + ": joint " +
                                         std::to_string(i) + " has a non-numeric coordinate");
            pose.joints(i, d) = row[d].get<double>();
        }
    }
    if (!pose.joints.allFinite())
        throw std::runtime_error("line " + std::to_string(line) + ": non-finite coordinate");
    return pose;
}

// Category columns: canonical order when all categories are canonical,
// alphabetical otherwise.
std::vector<std::string> category_columns(const std::vector<EvalRow>& rows) {
    std::set<std::string> seen;
    for (const EvalRow& row : rows)
        for (const auto& [category, value] : row.per_category) seen.insert(category);
    const auto& canonical = category_names();
    const bool all_canonical =
        std::all_of(seen.begin(), seen.end(), [&](const std::string& c) {
            return std::find(canonical.begin(), canonical.end(), c) != canonical.end();
        });
    std::vector<std::string> columns;
    if (all_canonical) {
        for (const std::string& c : canonical)
            if (seen.count(c)) columns.push_back(c);
    } else {
        columns.assign(seen.begin(), seen.end());
    }
    return columns;
}

json row_to_json(const EvalRow& row) {
    json j;
    j["method"] = row.method;
    j["regime"] = row.regime;
    j["mode"] = row.mode;
    j["overall"] = row.overall;
    j["variance"] = row.variance;
    j["samples"] = row.samples;
    j["per_category"] = row.per_category;
    j["category_counts"] = row.category_counts;
    json by_mask = json::object();
    for (const auto& [size, err] : row.err_by_mask_size)
        by_mask[std::to_string(size)] = err;
    j["err_by_mask_size"] = std::move(by_mask);
    j["mean_asymmetry"] = row.mean_asymmetry;
    j["clamped_values"] = row.clamped_values;
    j["non_converged"] = row.non_converged;
    return j;
}

} // namespace

Dataset load_dataset(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    Dataset dataset;
    dataset.provenance = "ingested";
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": invalid JSON (" + e.what() + ")");
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("category") ||
            !j.contains("joints2d"))
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": record needs id, category and joints2d");

        PoseRecord record;
        record.id = j["id"].get<std::string>();
        record.category = j["category"].get<std::string>();
        record.pose2d = pose_from_json(j["joints2d"], 2, line_number);
        if (j.contains("joints3d") && !j["joints3d"].is_null())
            record.pose3d = pose_from_json(j["joints3d"], 3, line_number);
        dataset.records.push_back(std::move(record));
    }
    if (dataset.records.empty() && warnings)
        warnings->push_back(path + " contained no records");
    return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::string out;
    for (const PoseRecord& record : dataset.records) {
        json j;
        j["id"] = record.id;
        j["category"] = record.category;
        j["joints2d"] = pose_to_json(record.pose2d);
        j["joints3d"] = record.pose3d ? pose_to_json(*record.pose3d) : json(nullptr);
        out += j.dump();
        out += '\n';
    }
    atomic_write(path, out);
}

void save_plan(const OcclusionPlan& plan, const Dataset& dataset, const std::string& path) {
    if (plan.masks.size() != dataset.records.size())
        throw std::invalid_argument("plan does not match dataset");
    std::string out;
    json header;
    header["kind"] = "occlusion-plan";
    header["regime"] = plan.regime;
    header["seed"] = plan.seed;
    out += header.dump();
    out += '\n';
    for (size_t i = 0; i < plan.masks.size(); ++i) {
        json j;
        j["id"] = dataset.records[i].id;
        j["occluded"] = plan.masks[i].occluded;
        out += j.dump();
        out += '\n';
    }
    atomic_write(path, out);
}

PlanFile load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    PlanFile file;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": invalid JSON (" + e.what() + ")");
        }
        if (j.contains("kind") && j["kind"] == "occlusion-plan") {
            file.regime = j.value("regime", "file");
            file.seed = j.value("seed", 0ULL);
            continue;
        }
        if (!j.contains("id") || !j.contains("occluded"))
            throw std::runtime_error("line " + std::to_string(line_number) +
                                     ": plan record needs id and occluded");
        file.ids.push_back(j["id"].get<std::string>());
        file.masks.push_back(JointMask::from_indices(j["occluded"].get<std::vector<int>>()));
    }
    return file;
}

OcclusionPlan align_plan(const PlanFile& file, const Dataset& dataset) {
    if (file.ids.size() != dataset.records.size())
        throw std::runtime_error("plan has " + std::to_string(file.ids.size()) +
                                 " records but dataset has " +
                                 std::to_string(dataset.records.size()));
    for (size_t i = 0; i < file.ids.size(); ++i)
        if (file.ids[i] != dataset.records[i].id)
            throw std::runtime_error("plan record " + std::to_string(i) + " id '" +
                                     file.ids[i] + "' does not match dataset id '" +
                                     dataset.records[i].id + "'");
    OcclusionPlan plan;
    plan.masks = file.masks;
    plan.regime = file.regime;
    plan.seed = file.seed;
    for (const JointMask& mask : plan.masks) mask.validate(kJointCount);
    return plan;
}

namespace {
constexpr char kDictMagic[9] = "EDMDICT1";
constexpr char kModelMagic[9] = "EDMNET01";
constexpr std::uint32_t kFormatVersion = 1;
} // namespace

void save_dictionary(const Dictionary& dict, const std::string& path,
                     const std::string& provenance_json) {
    std::string out;
    out.append(kDictMagic, 8);
    append_raw<std::uint32_t>(out, kFormatVersion);
    append_raw<std::int32_t>(out, dict.joint_count);
    append_raw<std::int32_t>(out, dict.k());
    append_raw<std::int32_t>(out, dict.atom_length());
    append_raw<double>(out, dict.train_lambda);
    append_raw<std::uint64_t>(out, dict.seed);
    append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(provenance_json.size()));
    out += provenance_json;
    for (int j = 0; j < dict.k(); ++j)
        out.append(reinterpret_cast<const char*>(dict.atoms.col(j).data()),
                   static_cast<size_t>(dict.atom_length()) * sizeof(double));
    atomic_write(path, out);
}

Dictionary load_dictionary(const std::string& path, std::string* provenance_json) {
    const std::string data = read_file(path);
    BinaryReader reader{data};
    if (reader.take_bytes(8) != std::string(kDictMagic, 8))
        throw std::runtime_error(path + " is not a dictionary file");
    const auto version = reader.take<std::uint32_t>();
    if (version != kFormatVersion)
        throw std::runtime_error(path + ": dictionary format version " +
                                 std::to_string(version) + " unsupported (expected " +
                                 std::to_string(kFormatVersion) + ")");
    Dictionary dict;
    dict.joint_count = reader.take<std::int32_t>();
    const int k = reader.take<std::int32_t>();
    const int atom_length = reader.take<std::int32_t>();
    dict.train_lambda = reader.take<double>();
    dict.seed = reader.take<std::uint64_t>();
    const auto prov_len = reader.take<std::uint32_t>();
    const std::string prov = reader.take_bytes(prov_len);
    if (provenance_json) *provenance_json = prov;
    dict.atoms.resize(atom_length, k);
    for (int j = 0; j < k; ++j) {
        const std::string bytes = reader.take_bytes(static_cast<size_t>(atom_length) * sizeof(double));
        std::memcpy(dict.atoms.col(j).data(), bytes.data(), bytes.size());
    }
    return dict;
}

void save_model(const NetworkParams& params, const std::string& path,
                const std::string& provenance_json) {
    std::string out;
    out.append(kModelMagic, 8);
    append_raw<std::uint32_t>(out, kFormatVersion);
    append_raw<std::int32_t>(out, params.config.input_size);
    append_raw<std::int32_t>(out, params.config.channels);
    append_raw<std::int32_t>(out, params.config.kernel);
    append_raw<double>(out, params.config.weight_init_scale);
    append_raw<std::uint32_t>(out, static_cast<std::uint32_t>(provenance_json.size()));
    out += provenance_json;
    for (const ConvLayer* layer :
         {&params.conv1, &params.conv2, &params.deconv1, &params.deconv2, &params.conv3}) {
        append_matrix(out, layer->weights);
        append_vector(out, layer->bias);
    }
    atomic_write(path, out);
}

NetworkParams load_model(const std::string& path, std::string* provenance_json) {
    const std::string data = read_file(path);
    BinaryReader reader{data};
    if (reader.take_bytes(8) != std::string(kModelMagic, 8))
        throw std::runtime_error(path + " is not a model file");
    const auto version = reader.take<std::uint32_t>();
    if (version != kFormatVersion)
        throw std::runtime_error(path + ": model format version " + std::to_string(version) +
                                 " unsupported (expected " + std::to_string(kFormatVersion) + ")");
    NetConfig config;
    config.input_size = reader.take<std::int32_t>();
    config.channels = reader.take<std::int32_t>();
    config.kernel = reader.take<std::int32_t>();
    config.weight_init_scale = reader.take<double>();
    const auto prov_len = reader.take<std::uint32_t>();
    const std::string prov = reader.take_bytes(prov_len);
    if (provenance_json) *provenance_json = prov;

    NetworkParams params = net_init(config, 0);
    for (ConvLayer* layer :
         {&params.conv1, &params.conv2, &params.deconv1, &params.deconv2, &params.conv3}) {
        layer->weights = take_matrix(reader);
        layer->bias = take_vector(reader);
    }
    if (!params.all_finite()) throw std::runtime_error(path + ": model has non-finite values");
    return params;
}

void save_report_json(const std::vector<EvalRow>& rows, const std::string& config_json,
                      const std::string& path) {
    json j;
    j["version"] = kLibraryVersion;
    j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    json out_rows = json::array();
    for (const EvalRow& row : rows) out_rows.push_back(row_to_json(row));
    j["rows"] = std::move(out_rows);
    atomic_write(path, j.dump(2) + "\n");
}

void save_report_csv(const std::vector<EvalRow>& rows, const std::string& path) {
    const std::vector<std::string> columns = category_columns(rows);
    std::string out = "method,regime,mode";
    for (const std::string& c : columns) out += "," + c;
    out += ",Overall,variance,samples\n";
    for (const EvalRow& row : rows) {
        out += row.method + "," + row.regime + "," + row.mode;
        for (const std::string& c : columns) {
            out += ",";
            const auto it = row.per_category.find(c);
            if (it != row.per_category.end()) out += format_double(it->second);
        }
        out += "," + format_double(row.overall);
        out += "," + format_double(row.variance);
        out += "," + std::to_string(row.samples);
        out += "\n";
    }
    atomic_write(path, out);
}

void save_timing_json(const std::vector<EvalRow>& rows, const std::string& path) {
    json j;
    j["version"] = kLibraryVersion;
    json out_rows = json::array();
    for (const EvalRow& row : rows) {
        json r;
        r["method"] = row.method;
        r["regime"] = row.regime;
        r["mode"] = row.mode;
        r["mean_seconds"] = row.mean_seconds;
        r["median_seconds"] = row.median_seconds;
        r["total_seconds"] = row.total_seconds;
        out_rows.push_back(std::move(r));
    }
    j["rows"] = std::move(out_rows);
    atomic_write(path, j.dump(2) + "\n");
}

void save_trace(const EvalRow& row, int max_samples, const std::string& path) {
    std::string out;
    const int count = std::min<int>(max_samples, static_cast<int>(row.per_sample_err.size()));
    for (int i = 0; i < count; ++i)
        out += std::to_string(i) + " " + format_double(row.per_sample_err[i]) + "\n";
    atomic_write(path, out);
}

void save_curve_csv(const std::vector<TrainCurvePoint>& curve, const std::string& path) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (const TrainCurvePoint& point : curve)
        out += std::to_string(point.epoch) + "," + format_double(point.train_loss) + "," +
               format_double(point.val_loss) + "\n";
    atomic_write(path, out);
}

void save_sweep_files(const std::vector<SweepRow>& rows, const std::string& err_path,
                      const std::string& time_path) {
    std::string err_out, time_out;
    for (const SweepRow& row : rows) {
        err_out += std::to_string(row.k) + " " + format_double(row.err) + "\n";
        time_out += std::to_string(row.k) + " " + format_double(row.seconds_per_sample) + "\n";
    }
    atomic_write(err_path, err_out);
    atomic_write(time_path, time_out);
}

void save_sweep_json(const std::vector<SweepRow>& rows, const std::string& config_json,
                     const std::string& path) {
    json j;
    j["version"] = kLibraryVersion;
    j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    // Timing lives in the two-column time file so this report stays
    // byte-identical across runs.
    json out_rows = json::array();
    for (const SweepRow& row : rows) {
        json r;
        r["k"] = row.k;
        r["err"] = row.err;
        out_rows.push_back(std::move(r));
    }
    j["rows"] = std::move(out_rows);
    atomic_write(path, j.dump(2) + "\n");
}

} // namespace edmrec
