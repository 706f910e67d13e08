#include "edmrec/sparse.hpp"
#include "edmrec/pose_core.hpp"

#include <cmath>
#include <string>

namespace edmrec {

void Dictionary::validate() const {
    if (k() < 1)
        throw std::invalid_argument("dictionary needs at least one atom");
    if (!atoms.allFinite())
        throw std::invalid_argument("dictionary has a non-finite value");
    for (int j = 0; j < k(); ++j) {
        const double norm = atoms.col(j).norm();
        if (std::abs(norm - 1.0) > 1e-9)
            throw std::invalid_argument("atom " + std::to_string(j) +
                                        " is not unit norm (" + std::to_string(norm) + ")");
    }
}

MaskedProblem extract_subproblem(const EdmVector& target, const JointMask& mask,
                                 const Dictionary& dict, double lambda) {
    if (lambda < 0.0)
        throw std::invalid_argument("lambda must be nonnegative");
    if (target.length() != dict.atom_length())
        throw std::invalid_argument("target length " + std::to_string(target.length()) +
                                    " does not match atom length " +
                                    std::to_string(dict.atom_length()));
    // Recover N from the triangle length.
    const int len = target.length();
    const int n = static_cast<int>(std::lround((1.0 + std::sqrt(1.0 + 8.0 * len)) / 2.0));
    if (tri_length(n) != len)
        throw std::invalid_argument("target length " + std::to_string(len) +
                                    " is not a triangle number");

    MaskedProblem problem;
    problem.observed_position_set = observed_positions(mask, n);
    if (problem.observed_position_set.empty())
        throw std::invalid_argument("empty problem: no observed joint pairs remain");

    const int rows = static_cast<int>(problem.observed_position_set.size());
    problem.observed_values.resize(rows);
    problem.sub_atoms.resize(rows, dict.k());
    for (int r = 0; r < rows; ++r) {
        const int pos = problem.observed_position_set[r];
        problem.observed_values(r) = target.values(pos);
        problem.sub_atoms.row(r) = dict.atoms.row(pos);
    }
    problem.lambda = lambda;
    return problem;
}

double lasso_objective(const MaskedProblem& problem, const Eigen::VectorXd& code) {
    const Eigen::VectorXd residual = problem.observed_values - problem.sub_atoms * code;
    return residual.squaredNorm() + problem.lambda * code.lpNorm<1>();
}

double estimate_lipschitz(const Eigen::MatrixXd& sub_atoms) {
    const int k = static_cast<int>(sub_atoms.cols());
    Eigen::VectorXd v = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(double(k)));
    double eig = 0.0;
    for (int iter = 0; iter < 30; ++iter) {
        Eigen::VectorXd w = sub_atoms.transpose() * (sub_atoms * v);
        const double norm = w.norm();
        if (norm < 1e-30) return 0.0;
        const double next = v.dot(w);
        v = w / norm;
        if (iter > 0 && std::abs(next - eig) <= 1e-6 * std::abs(next)) {
            eig = next;
            break;
        }
        eig = next;
    }
    return 2.0 * std::max(eig, 0.0);
}

namespace {

inline void soft_threshold(const Eigen::VectorXd& v, double thresh, Eigen::VectorXd& out) {
    out = (v.array().abs() - thresh).max(0.0) * v.array().sign();
}

double kkt_from_gradient(const Eigen::VectorXd& grad, const Eigen::VectorXd& code,
                         double lambda) {
    double worst = 0.0;
    for (int i = 0; i < code.size(); ++i) {
        double violation;
        if (code(i) != 0.0)
            violation = std::abs(grad(i) + lambda * (code(i) > 0.0 ? 1.0 : -1.0));
        else
            violation = std::max(std::abs(grad(i)) - lambda, 0.0);
        worst = std::max(worst, violation);
    }
    return worst;
}

} // namespace

LassoResult solve_lasso(const MaskedProblem& problem, const LassoOptions& options) {
    if (options.tol <= 0.0)
        throw std::invalid_argument("solver tolerance must be positive");
    const int k = static_cast<int>(problem.sub_atoms.cols());
    const Eigen::MatrixXd& d = problem.sub_atoms;
    const Eigen::VectorXd& b = problem.observed_values;
    const double lambda = problem.lambda;

    LassoResult result;
    result.code.weights = Eigen::VectorXd::Zero(k);

    // Power iteration approaches the top eigenvalue from below; the 1%
    // margin keeps the step below 1/L even when the estimate is short.
    const double lipschitz =
        1.01 * (options.lipschitz ? *options.lipschitz : estimate_lipschitz(d));
    if (lipschitz < 1e-30) {
        // Gradient is identically ~0, so the zero code is optimal.
        result.converged = true;
        result.kkt = kkt_residual(problem, result.code);
        if (options.record_objective)
            result.objective_trace.push_back(lasso_objective(problem, result.code.weights));
        return result;
    }
    const double step = 1.0 / lipschitz;
    const double shrink = lambda * step;

    // Monotone FISTA: the accelerated candidate is only accepted when it
    // does not increase the objective, which keeps the per-iteration
    // objective non-increasing even if the Lipschitz estimate is low.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd r_x = -b; // D x - b
    double f_x = r_x.squaredNorm();
    Eigen::VectorXd y = x;
    Eigen::VectorXd r_y = r_x;
    Eigen::VectorXd z(k), r_z(k), grad(k);
    double t = 1.0;

    for (int iter = 1; iter <= options.max_iters; ++iter) {
        grad.noalias() = 2.0 * (d.transpose() * r_y);
        soft_threshold(y - step * grad, shrink, z);
        r_z.noalias() = d * z;
        r_z -= b;
        const double f_z = r_z.squaredNorm() + lambda * z.lpNorm<1>();

        const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
        const bool accept = f_z <= f_x;
        const Eigen::VectorXd& x_new = accept ? z : x;
        const Eigen::VectorXd& r_new = accept ? r_z : r_x;
        const double f_new = accept ? f_z : f_x;

        y = x_new + (t / t_next) * (z - x_new) + ((t - 1.0) / t_next) * (x_new - x);
        r_y = r_new + (t / t_next) * (r_z - r_new) + ((t - 1.0) / t_next) * (r_new - r_x);

        if (!accept) {
            // keep x, r_x, f_x
        } else {
            x = z;
            r_x = r_z;
            f_x = f_new;
        }
        t = t_next;
        result.iterations = iter;
        if (options.record_objective) result.objective_trace.push_back(f_x);

        grad.noalias() = 2.0 * (d.transpose() * r_x);
        result.kkt = kkt_from_gradient(grad, x, lambda);
        if (result.kkt <= options.tol) {
            result.converged = true;
            break;
        }
    }

    if (result.iterations == 0) result.kkt = kkt_residual(problem, SparseCode{x});
    result.code.weights = x;
    return result;
}

double kkt_residual(const MaskedProblem& problem, const SparseCode& code) {
    if (code.weights.size() != problem.sub_atoms.cols())
        throw std::invalid_argument("code length does not match dictionary size");
    const Eigen::VectorXd grad =
        -2.0 * (problem.sub_atoms.transpose() *
                (problem.observed_values - problem.sub_atoms * code.weights));
    return kkt_from_gradient(grad, code.weights, problem.lambda);
}

EdmVector reconstruct(const Dictionary& dict, const SparseCode& code) {
    if (code.weights.size() != dict.k())
        throw std::invalid_argument("code length does not match atom count");
    return EdmVector{dict.atoms * code.weights};
}

SparseRecoveryResult recover_sparse(const DistanceMatrix& occluded, const JointMask& mask,
                                    const Dictionary& dict, double lambda,
                                    const LassoOptions& options) {
    const int n = occluded.size();
    const EdmVector target = vectorize(occluded);
    const MaskedProblem problem = extract_subproblem(target, mask, dict, lambda);
    const LassoResult solved = solve_lasso(problem, options);
    const EdmVector recovered = reconstruct(dict, solved.code);
    DevectorizeResult dev = devectorize(recovered, n);

    SparseRecoveryResult out;
    out.matrix = assemble_final(occluded, dev.matrix, mask);
    out.converged = solved.converged;
    out.iterations = solved.iterations;
    out.clamped = dev.clamped;
    return out;
}

} // namespace edmrec
