#pragma once

#include "edmrec/datagen.hpp"
#include "edmrec/dictionary_learning.hpp"
#include "edmrec/evaluate.hpp"
#include "edmrec/net.hpp"

#include <string>
#include <vector>

namespace edmrec {

// Deterministic float formatting for text reports (%.9g).
std::string format_double(double value);

// Writes via a temporary file plus rename so readers never observe a
// partial artifact.
void atomic_write(const std::string& path, const std::string& content);

// --- JSONL pose datasets (see README for the schema) ---

Dataset load_dataset(const std::string& path, std::vector<std::string>* warnings = nullptr);
void save_dataset(const Dataset& dataset, const std::string& path);

// --- JSONL occlusion plans: a header line then {"id","occluded"} records ---

void save_plan(const OcclusionPlan& plan, const Dataset& dataset, const std::string& path);

struct PlanFile {
    std::vector<std::string> ids;
    std::vector<JointMask> masks;
    std::string regime = "file";
    std::uint64_t seed = 0;
};

PlanFile load_plan(const std::string& path);

// Matches plan records to the dataset by id, in order.
OcclusionPlan align_plan(const PlanFile& file, const Dataset& dataset);

// --- Binary dictionary container (layout documented in the README) ---

void save_dictionary(const Dictionary& dict, const std::string& path,
                     const std::string& provenance_json);
Dictionary load_dictionary(const std::string& path, std::string* provenance_json = nullptr);

// --- Binary model container ---

void save_model(const NetworkParams& params, const std::string& path,
                const std::string& provenance_json);
NetworkParams load_model(const std::string& path, std::string* provenance_json = nullptr);

// --- Reports and plot data ---

void save_report_json(const std::vector<EvalRow>& rows, const std::string& config_json,
                      const std::string& path);
void save_report_csv(const std::vector<EvalRow>& rows, const std::string& path);
void save_timing_json(const std::vector<EvalRow>& rows, const std::string& path);
void save_trace(const EvalRow& row, int max_samples, const std::string& path);
void save_curve_csv(const std::vector<TrainCurvePoint>& curve, const std::string& path);
void save_sweep_files(const std::vector<SweepRow>& rows, const std::string& err_path,
                      const std::string& time_path);
void save_sweep_json(const std::vector<SweepRow>& rows, const std::string& config_json,
                     const std::string& path);

} // namespace edmrec
