#pragma once

#include "edmrec/datagen.hpp"
#include "edmrec/net.hpp"
#include "edmrec/sparse.hpp"

#include <map>
#include <string>

namespace edmrec {

enum class RecoveryMethod { ZeroNet, AveNet, Sparse, Identity };

RecoveryMethod parse_method(const std::string& name);
std::string method_name(RecoveryMethod method);

// Trained artifacts handed to the evaluation; only the fields a method
// needs have to be set.
struct MethodArtifacts {
    const NetworkParams* zero_net = nullptr;
    const NetworkParams* ave_net = nullptr;
    const Dictionary* dictionary = nullptr;
    double sparse_lambda = 0.1;
    LassoOptions sparse_options;
    std::string identity_rep = "zero"; // representation fed through unrecovered
};

// One row of a Table-2-shaped report: a method evaluated under one
// occlusion regime.
struct EvalRow {
    std::string method;
    std::string regime;
    std::string mode = "recovery"; // "recovery" or "pipeline"
    std::map<std::string, double> per_category;
    std::map<std::string, long> category_counts;
    double overall = 0.0;
    double variance = 0.0; // population variance of per-sample err_ave
    long samples = 0;
    std::map<int, double> err_by_mask_size;

    // Timing sidecar (measured, excluded from byte-identity guarantees).
    double mean_seconds = 0.0;
    double median_seconds = 0.0;
    double total_seconds = 0.0;

    // Diagnostics.
    double mean_asymmetry = 0.0; // network methods
    long clamped_values = 0;     // sparse devectorize clamps
    long non_converged = 0;      // sparse solver flags

    std::vector<double> per_sample_err; // in record order, for traces
};

// Recovery-space evaluation: build the occluded EDM under the method's
// representation, recover, splice via final assembly, and score against
// the complete normalized 2D EDM.
EvalRow evaluate_recovery(RecoveryMethod method, const Dataset& dataset,
                          const OcclusionPlan& plan, const MethodArtifacts& artifacts,
                          int workers = 1);

// Pipeline evaluation: the recovered (or unrecovered, for the identity
// baseline) 2D EDM is regressed to 3D and scored against the normalized
// ground-truth 3D EDM.
EvalRow evaluate_pipeline(RecoveryMethod method, const NetworkParams& regressor3d,
                          const Dataset& dataset, const OcclusionPlan& plan,
                          const MethodArtifacts& artifacts, int workers = 1);

} // namespace edmrec
