#pragma once

// Test-only oracles for the masked LASSO solver. They stay independent of
// the solver implementation: the enumeration walks stationary points per
// support and orthant, the closed form handles orthonormal dictionaries.

#include "edmrec/sparse.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace edmrec::testutil {

// Global minimum of ||b - Dc||^2 + lambda*||c||_1 over codes with support
// size at most max_support, found by enumerating every support and sign
// pattern and solving the stationarity system on that orthant. Exact for
// problems whose true optimum is at most max_support-sparse.
inline double enumerate_lasso_objective(const MaskedProblem& problem, int max_support) {
    const Eigen::MatrixXd& d = problem.sub_atoms;
    const Eigen::VectorXd& b = problem.observed_values;
    const double lambda = problem.lambda;
    const int k = static_cast<int>(d.cols());

    double best = b.squaredNorm(); // c = 0

    std::vector<int> support;
    auto evaluate_support = [&](const std::vector<int>& s) {
        const int m = static_cast<int>(s.size());
        Eigen::MatrixXd ds(d.rows(), m);
        for (int i = 0; i < m; ++i) ds.col(i) = d.col(s[i]);
        const Eigen::MatrixXd gram = ds.transpose() * ds;
        const Eigen::VectorXd corr = ds.transpose() * b;
        for (int pattern = 0; pattern < (1 << m); ++pattern) {
            Eigen::VectorXd sign(m);
            for (int i = 0; i < m; ++i) sign(i) = (pattern >> i) & 1 ? -1.0 : 1.0;
            const Eigen::VectorXd rhs = corr - 0.5 * lambda * sign;
            const Eigen::VectorXd c = gram.fullPivLu().solve(rhs);
            if ((gram * c - rhs).cwiseAbs().maxCoeff() > 1e-8) continue; // singular system
            bool consistent = true;
            for (int i = 0; i < m && consistent; ++i)
                if (c(i) * sign(i) < -1e-12) consistent = false;
            if (!consistent) continue;
            const double objective =
                (b - ds * c).squaredNorm() + lambda * c.cwiseAbs().sum();
            best = std::min(best, objective);
        }
    };

    // Depth-first support enumeration up to max_support elements.
    std::function<void(int)> recurse = [&](int start) {
        for (int j = start; j < k; ++j) {
            support.push_back(j);
            evaluate_support(support);
            if (static_cast<int>(support.size()) < max_support) recurse(j + 1);
            support.pop_back();
        }
    };
    recurse(0);
    return best;
}

// Soft-threshold closed form for a square orthonormal dictionary.
inline Eigen::VectorXd orthonormal_lasso_solution(const Eigen::MatrixXd& q,
                                                  const Eigen::VectorXd& b, double lambda) {
    const Eigen::VectorXd corr = q.transpose() * b;
    Eigen::VectorXd c(corr.size());
    for (int i = 0; i < corr.size(); ++i) {
        const double magnitude = std::abs(corr(i)) - lambda / 2.0;
        c(i) = magnitude > 0.0 ? (corr(i) > 0.0 ? magnitude : -magnitude) : 0.0;
    }
    return c;
}

} // namespace edmrec::testutil
