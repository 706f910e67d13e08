#pragma once

#include "edmrec/sparse.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace edmrec {

struct LearnConfig {
    int k = 256;
    double lambda = 0.1;
    int epochs = 10;
    int batch_size = 64;
    std::uint64_t seed = 0;
    // Atoms used fewer times than this during an epoch get replaced.
    long atom_replacement_threshold = 1;
    // Inner sparse-coding solver settings for training passes.
    double solver_tol = 1e-5;
    int solver_max_iters = 500;
    int workers = 1;
};

// Accumulated sufficient statistics for the online updates.
struct LearnerState {
    Dictionary dict;
    Eigen::MatrixXd code_cov;  // A, k x k, sum of c c^T
    Eigen::MatrixXd data_code; // B, atom_length x k, sum of T c^T
    long samples_seen = 0;
    std::uint64_t rng_seed = 0;
    std::vector<long> epoch_usage; // per-atom uses since the epoch began

    // Worst-reconstructed samples seen this epoch, for dead-atom
    // replacement. Kept sorted by residual, largest first.
    struct WorstSample {
        double residual = 0.0;
        Eigen::VectorXd values;
    };
    std::vector<WorstSample> worst;

    static LearnerState create(Dictionary dict, std::uint64_t seed);
};

// k atoms drawn uniformly from the samples (distinct while possible,
// repeating once the samples run out), each normalized to unit norm.
Dictionary init_dictionary(const std::vector<EdmVector>& samples, int k, std::uint64_t seed);

// One online update: sparse-code every batch sample against the current
// dictionary, fold the codes into A and B in sample order, then run one
// block-coordinate pass over the atoms.
void learn_step(LearnerState& state, const std::vector<EdmVector>& batch, double lambda,
                const LassoOptions& solver = {}, int workers = 1);

struct ObjectiveResult {
    double value = 0.0;
    int non_converged = 0;
};

// Mean over samples of 1/2 (||T - Dc||^2 + lambda ||c||_1) with each
// code freshly solved.
ObjectiveResult dictionary_objective(const Dictionary& dict,
                                     const std::vector<EdmVector>& samples, double lambda,
                                     const LassoOptions& solver = {}, int workers = 1);

struct EpochStats {
    double objective = 0.0;
    int replaced_atoms = 0;
    double seconds = 0.0;
};

struct TrainingReport {
    std::vector<EpochStats> epochs;
    double total_seconds = 0.0;
    int total_replacements = 0;
    std::vector<std::string> warnings;
};

struct LearnOutput {
    Dictionary dict;
    TrainingReport report;
};

// Full training loop: seeded shuffles, batch streaming, dead-atom
// replacement at epoch boundaries, per-epoch objective on a fixed
// validation subset.
LearnOutput learn_dictionary(const std::vector<EdmVector>& samples, const LearnConfig& config);

// One evaluation case for the dictionary-size sweep.
struct SweepCase {
    DistanceMatrix occluded;
    JointMask mask;
    DistanceMatrix ground_truth;
};

struct SweepRow {
    int k = 0;
    double err = 0.0;
    double seconds_per_sample = 0.0;
};

// Retrains a dictionary per size and evaluates masked recovery on the
// given cases, timing each recovery call.
std::vector<SweepRow> sweep_sizes(const std::vector<EdmVector>& train_samples,
                                  const std::vector<SweepCase>& test_cases,
                                  const std::vector<int>& sizes, const LearnConfig& base,
                                  double recover_lambda, const LassoOptions& recover_solver = {});

// Lipschitz constant of the masked subproblem for this dictionary;
// depends only on the mask, so callers can cache it across samples.
double lipschitz_for_mask(const Dictionary& dict, const JointMask& mask, int joint_count);

} // namespace edmrec
