#pragma once

#include "edmrec/types.hpp"

#include <cstdint>
#include <optional>

namespace edmrec {

// Over-complete dictionary of unit-norm upper-triangle EDM vectors,
// stored one atom per column.
struct Dictionary {
    Eigen::MatrixXd atoms; // atom_length x k

    // File-header metadata, carried along for provenance.
    int joint_count = 0;
    double train_lambda = 0.0;
    std::uint64_t seed = 0;

    int k() const { return static_cast<int>(atoms.cols()); }
    int atom_length() const { return static_cast<int>(atoms.rows()); }

    // Throws unless every atom has unit norm (tolerance 1e-9), k >= 1
    // and all values are finite.
    void validate() const;
};

struct SparseCode {
    Eigen::VectorXd weights;

    int sparsity(double threshold = 1e-8) const {
        return static_cast<int>((weights.array().abs() > threshold).count());
    }
};

// The occluded-joints-unrelated sparse coding problem: targets and atoms
// restricted to the observed upper-triangle positions.
struct MaskedProblem {
    Eigen::VectorXd observed_values;      // T_sub
    std::vector<int> observed_position_set;
    Eigen::MatrixXd sub_atoms;            // D_sub, |observed| x k
    double lambda = 0.0;
};

MaskedProblem extract_subproblem(const EdmVector& target, const JointMask& mask,
                                 const Dictionary& dict, double lambda);

struct LassoOptions {
    double tol = 1e-6;
    int max_iters = 5000;
    bool record_objective = false;
    // Precomputed Lipschitz constant of the smooth gradient
    // (largest eigenvalue of 2 * D_sub^T D_sub); estimated by power
    // iteration when absent.
    std::optional<double> lipschitz;
};

struct LassoResult {
    SparseCode code;
    bool converged = false;
    int iterations = 0;
    double kkt = 0.0;
    std::vector<double> objective_trace; // filled when record_objective
};

// Objective of Eq-style scaling ||T_sub - D_sub c||^2 + lambda*||c||_1
// (no 1/2 factor).
double lasso_objective(const MaskedProblem& problem, const Eigen::VectorXd& code);

// Largest eigenvalue of 2 * D^T D via power iteration (30 iterations,
// relative tolerance 1e-6, deterministic start).
double estimate_lipschitz(const Eigen::MatrixXd& sub_atoms);

// Accelerated proximal gradient (monotone FISTA) with step 1/L. Returns
// once the subgradient optimality residual drops below tol or max_iters
// is reached; the result is flagged either way.
LassoResult solve_lasso(const MaskedProblem& problem, const LassoOptions& options = {});

// Max violation of the LASSO subgradient conditions: with
// g = -2 * D_sub^T (T_sub - D_sub c), active coordinates contribute
// |g_i + lambda*sign(c_i)| and inactive ones max(|g_i| - lambda, 0).
double kkt_residual(const MaskedProblem& problem, const SparseCode& code);

// Full-length linear combination of atoms, T_re = D c.
EdmVector reconstruct(const Dictionary& dict, const SparseCode& code);

struct SparseRecoveryResult {
    DistanceMatrix matrix;
    bool converged = true;
    int iterations = 0;
    int clamped = 0;
};

// Whole sparse pipeline: vectorize, restrict to observed positions,
// solve the masked LASSO, reconstruct, devectorize and splice recovered
// values into the occluded positions. Observed entries of the result
// equal the input exactly.
SparseRecoveryResult recover_sparse(const DistanceMatrix& occluded, const JointMask& mask,
                                    const Dictionary& dict, double lambda,
                                    const LassoOptions& options = {});

} // namespace edmrec
