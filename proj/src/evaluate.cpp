#include "edmrec/evaluate.hpp"

#include "edmrec/dictionary_learning.hpp"
#include "edmrec/parallel.hpp"
#include "edmrec/pose_core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace edmrec {

namespace {

using Clock = std::chrono::steady_clock;

struct SampleResult {
    double err = 0.0;
    double seconds = 0.0;
    double asymmetry = 0.0;
    int clamped = 0;
    bool converged = true;
};

DistanceMatrix build_representation(const PoseRecord& record, const JointMask& mask,
                                    RecoveryMethod method, const MethodArtifacts& artifacts) {
    switch (method) {
        case RecoveryMethod::ZeroNet:
            return represent_zero(record.pose2d, mask);
        case RecoveryMethod::AveNet:
        case RecoveryMethod::Sparse:
            return represent_average(record.pose2d, mask);
        case RecoveryMethod::Identity:
            return artifacts.identity_rep == "average" ? represent_average(record.pose2d, mask)
                                                       : represent_zero(record.pose2d, mask);
    }
    throw std::logic_error("unknown method");
}

const NetworkParams* net_for(RecoveryMethod method, const MethodArtifacts& artifacts) {
    if (method == RecoveryMethod::ZeroNet) return artifacts.zero_net;
    if (method == RecoveryMethod::AveNet) return artifacts.ave_net;
    return nullptr;
}

void require_artifacts(RecoveryMethod method, const MethodArtifacts& artifacts) {
    if ((method == RecoveryMethod::ZeroNet || method == RecoveryMethod::AveNet) &&
        !net_for(method, artifacts))
        throw std::invalid_argument("method " + method_name(method) +
                                    " needs a trained recovery network");
    if (method == RecoveryMethod::Sparse && !artifacts.dictionary)
        throw std::invalid_argument("method sparse needs a learned dictionary");
}

// Lipschitz constants depend on the mask only; precompute them so the
// parallel workers share one read-only table.
std::map<std::vector<int>, double> lipschitz_table(const OcclusionPlan& plan,
                                                   const Dictionary& dict, int joint_count) {
    std::map<std::vector<int>, double> table;
    for (const JointMask& mask : plan.masks)
        if (!table.count(mask.occluded))
            table[mask.occluded] = lipschitz_for_mask(dict, mask, joint_count);
    return table;
}

// Recover one record's EDM in 2D space; fills the timing/diagnostic slot.
DistanceMatrix recover_one(const PoseRecord& record, const JointMask& mask,
                           RecoveryMethod method, const MethodArtifacts& artifacts,
                           const std::map<std::vector<int>, double>* lipschitz,
                           SampleResult& slot) {
    const DistanceMatrix occluded = build_representation(record, mask, method, artifacts);
    const auto start = Clock::now();
    DistanceMatrix recovered;
    switch (method) {
        case RecoveryMethod::ZeroNet:
        case RecoveryMethod::AveNet: {
            const NetworkParams* net = net_for(method, artifacts);
            const Eigen::MatrixXd raw = net_forward(*net, occluded.entries);
            slot.asymmetry = asymmetry(raw);
            recovered = assemble_final(occluded, symmetrize_and_clamp(raw), mask);
            break;
        }
        case RecoveryMethod::Sparse: {
            LassoOptions options = artifacts.sparse_options;
            if (lipschitz) options.lipschitz = lipschitz->at(mask.occluded);
            const SparseRecoveryResult result = recover_sparse(
                occluded, mask, *artifacts.dictionary, artifacts.sparse_lambda, options);
            slot.clamped = result.clamped;
            slot.converged = result.converged;
            recovered = result.matrix;
            break;
        }
        case RecoveryMethod::Identity:
            recovered = occluded;
            break;
    }
    slot.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return recovered;
}

EvalRow aggregate(const std::string& method, const OcclusionPlan& plan, const Dataset& dataset,
                  const std::vector<SampleResult>& slots, const std::string& mode) {
    EvalRow row;
    row.method = method;
    row.regime = plan.regime;
    row.mode = mode;
    row.samples = static_cast<long>(slots.size());

    std::map<std::string, double> category_sums;
    std::map<int, double> mask_sums;
    std::map<int, long> mask_counts;
    std::vector<double> seconds;
    seconds.reserve(slots.size());
    double asym_sum = 0.0;
    for (size_t i = 0; i < slots.size(); ++i) {
        const SampleResult& slot = slots[i];
        const std::string& category = dataset.records[i].category;
        category_sums[category] += slot.err;
        row.category_counts[category] += 1;
        const int mask_size = plan.masks[i].size();
        mask_sums[mask_size] += slot.err;
        mask_counts[mask_size] += 1;
        row.per_sample_err.push_back(slot.err);
        seconds.push_back(slot.seconds);
        row.total_seconds += slot.seconds;
        asym_sum += slot.asymmetry;
        row.clamped_values += slot.clamped;
        if (!slot.converged) ++row.non_converged;
    }

    for (const auto& [category, sum] : category_sums)
        row.per_category[category] = sum / static_cast<double>(row.category_counts[category]);
    for (const auto& [size, sum] : mask_sums)
        row.err_by_mask_size[size] = sum / static_cast<double>(mask_counts[size]);

    // Overall is the record-count-weighted mean of the category means.
    double weighted = 0.0;
    for (const auto& [category, mean] : row.per_category)
        weighted += mean * static_cast<double>(row.category_counts[category]);
    row.overall = row.samples > 0 ? weighted / static_cast<double>(row.samples) : 0.0;

    double var = 0.0;
    for (double err : row.per_sample_err) {
        const double d = err - row.overall;
        var += d * d;
    }
    row.variance = row.samples > 0 ? var / static_cast<double>(row.samples) : 0.0;

    if (!seconds.empty()) {
        row.mean_seconds = row.total_seconds / static_cast<double>(seconds.size());
        std::sort(seconds.begin(), seconds.end());
        row.median_seconds = seconds[seconds.size() / 2];
    }
    row.mean_asymmetry = slots.empty() ? 0.0 : asym_sum / static_cast<double>(slots.size());
    return row;
}

} // namespace

RecoveryMethod parse_method(const std::string& name) {
    if (name == "zero-net") return RecoveryMethod::ZeroNet;
    if (name == "ave-net") return RecoveryMethod::AveNet;
    if (name == "sparse") return RecoveryMethod::Sparse;
    if (name == "identity") return RecoveryMethod::Identity;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected zero-net, ave-net, sparse or identity)");
}

std::string method_name(RecoveryMethod method) {
    switch (method) {
        case RecoveryMethod::ZeroNet: return "zero-net";
        case RecoveryMethod::AveNet: return "ave-net";
        case RecoveryMethod::Sparse: return "sparse";
        case RecoveryMethod::Identity: return "identity";
    }
    return "?";
}

EvalRow evaluate_recovery(RecoveryMethod method, const Dataset& dataset,
                          const OcclusionPlan& plan, const MethodArtifacts& artifacts,
                          int workers) {
    if (plan.masks.size() != dataset.records.size())
        throw std::invalid_argument("occlusion plan does not match the dataset");
    require_artifacts(method, artifacts);

    std::map<std::vector<int>, double> lipschitz;
    if (method == RecoveryMethod::Sparse)
        lipschitz = lipschitz_table(plan, *artifacts.dictionary, kJointCount);

    std::vector<SampleResult> slots(dataset.records.size());
    parallel_for(dataset.size(), workers, [&](int i) {
        const PoseRecord& record = dataset.records[i];
        const DistanceMatrix recovered =
            recover_one(record, plan.masks[i], method, artifacts,
                        method == RecoveryMethod::Sparse ? &lipschitz : nullptr, slots[i]);
        const DistanceMatrix truth = represent_zero(record.pose2d, JointMask::empty());
        slots[i].err = err_ave(err_matrix(recovered, truth));
    });

    return aggregate(method_name(method), plan, dataset, slots, "recovery");
}

EvalRow evaluate_pipeline(RecoveryMethod method, const NetworkParams& regressor3d,
                          const Dataset& dataset, const OcclusionPlan& plan,
                          const MethodArtifacts& artifacts, int workers) {
    if (plan.masks.size() != dataset.records.size())
        throw std::invalid_argument("occlusion plan does not match the dataset");
    require_artifacts(method, artifacts);
    for (const PoseRecord& record : dataset.records)
        if (!record.pose3d)
            throw std::invalid_argument("pipeline evaluation needs 3D ground truth for record " +
                                        record.id);

    std::map<std::vector<int>, double> lipschitz;
    if (method == RecoveryMethod::Sparse)
        lipschitz = lipschitz_table(plan, *artifacts.dictionary, kJointCount);

    std::vector<SampleResult> slots(dataset.records.size());
    parallel_for(dataset.size(), workers, [&](int i) {
        const PoseRecord& record = dataset.records[i];
        const DistanceMatrix recovered =
            recover_one(record, plan.masks[i], method, artifacts,
                        method == RecoveryMethod::Sparse ? &lipschitz : nullptr, slots[i]);

        const auto start = Clock::now();
        const Eigen::MatrixXd raw3d = net_forward(regressor3d, recovered.entries);
        const DistanceMatrix estimate = symmetrize_and_clamp(raw3d);
        slots[i].seconds += std::chrono::duration<double>(Clock::now() - start).count();

        const DistanceMatrix truth = edm_from_pose(normalize_pose3d(*record.pose3d));
        slots[i].err = err_ave(err_matrix(estimate, truth));
    });

    return aggregate(method_name(method) + "+3d", plan, dataset, slots, "pipeline");
}

} // namespace edmrec
