#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edmrec/pose_core.hpp"
#include "edmrec/rng.hpp"
#include "edmrec/sparse.hpp"
#include "lasso_oracle.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace edmrec;
using namespace edmrec::testutil;

namespace {

Dictionary random_dictionary(Rng& rng, int atom_length, int k) {
    Dictionary dict;
    dict.atoms.resize(atom_length, k);
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < atom_length; ++i) dict.atoms(i, j) = rng.normal();
        dict.atoms.col(j).normalize();
    }
    dict.joint_count = 0;
    return dict;
}

MaskedProblem random_problem(Rng& rng, int rows, int k, double lambda) {
    MaskedProblem problem;
    problem.sub_atoms.resize(rows, k);
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < rows; ++i) problem.sub_atoms(i, j) = rng.normal();
        problem.sub_atoms.col(j).normalize();
    }
    problem.observed_values.resize(rows);
    for (int i = 0; i < rows; ++i) problem.observed_values(i) = rng.normal();
    problem.observed_position_set.resize(rows);
    for (int i = 0; i < rows; ++i) problem.observed_position_set[i] = i;
    problem.lambda = lambda;
    return problem;
}

// Targets built from a sparse code so the optimum stays very sparse.
MaskedProblem sparse_ground_problem(Rng& rng, int rows, int k, double lambda) {
    MaskedProblem problem = random_problem(rng, rows, k, lambda);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(k);
    const int support = 1 + rng.uniform_int(2);
    for (int s = 0; s < support; ++s) {
        const int idx = rng.uniform_int(k);
        truth(idx) = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    }
    problem.observed_values = problem.sub_atoms * truth;
    for (int i = 0; i < rows; ++i) problem.observed_values(i) += 0.01 * rng.normal();
    return problem;
}

} // namespace

TEST_CASE("extract_subproblem restricts to observed positions") {
    Rng rng(31);
    const Dictionary dict = random_dictionary(rng, 91, 20);
    EdmVector target{Eigen::VectorXd(91)};
    for (int i = 0; i < 91; ++i) target.values(i) = rng.uniform(0.0, 3.0);

    SUBCASE("empty mask keeps all 91 rows") {
        const MaskedProblem p = extract_subproblem(target, JointMask::empty(), dict, 0.1);
        CHECK(p.observed_values.size() == 91);
        CHECK(p.sub_atoms.rows() == 91);
        CHECK((p.sub_atoms - dict.atoms).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("one occluded joint keeps 78 rows") {
        const MaskedProblem p =
            extract_subproblem(target, JointMask::from_indices({4}), dict, 0.1);
        CHECK(p.observed_values.size() == 78);
    }
    SUBCASE("three occluded joints keep 55 rows") {
        const MaskedProblem p =
            extract_subproblem(target, JointMask::from_indices({1, 7, 13}), dict, 0.1);
        CHECK(p.observed_values.size() == 55);
        // Restriction preserves relative order and values.
        const auto observed = observed_positions(JointMask::from_indices({1, 7, 13}), 14);
        for (size_t r = 0; r < observed.size(); ++r) {
            CHECK(p.observed_values(r) == target.values(observed[r]));
            CHECK(p.sub_atoms(r, 3) == dict.atoms(observed[r], 3));
        }
    }
    SUBCASE("occluding all but one joint is an error") {
        std::vector<int> all_but_one;
        for (int i = 1; i < 14; ++i) all_but_one.push_back(i);
        CHECK_THROWS_AS(
            extract_subproblem(target, JointMask::from_indices(all_but_one), dict, 0.1),
            std::invalid_argument);
    }
}

TEST_CASE("solve_lasso matches the exhaustive-support enumeration oracle") {
    Rng rng(32);
    LassoOptions options;
    options.tol = 1e-9;
    options.max_iters = 20000;
    // The enumeration is exact for optima with support size <= 3; draws
    // whose certified optimum is denser fall outside its domain and are
    // redrawn.
    int valid_trials = 0;
    int draws = 0;
    while (valid_trials < 30 && draws < 200) {
        ++draws;
        const int rows = 4 + rng.uniform_int(9);
        const int k = 4 + rng.uniform_int(9);
        const double lambda = rng.uniform(0.2, 0.8);
        const MaskedProblem problem = sparse_ground_problem(rng, rows, k, lambda);

        const LassoResult result = solve_lasso(problem, options);
        REQUIRE(result.converged);
        if (result.code.sparsity() > 3) continue;
        ++valid_trials;
        const double solver_obj = lasso_objective(problem, result.code.weights);
        const double oracle_obj = enumerate_lasso_objective(problem, 3);
        CHECK(std::abs(solver_obj - oracle_obj) <= 1e-6);
    }
    CHECK(valid_trials == 30);
}

TEST_CASE("solve_lasso matches the orthonormal closed form") {
    Rng rng(33);
    LassoOptions options;
    options.tol = 1e-10;
    options.max_iters = 50000;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 8;
        Eigen::MatrixXd gauss(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gauss(i, j) = rng.normal();
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();

        MaskedProblem problem;
        problem.sub_atoms = q;
        problem.observed_values.resize(n);
        for (int i = 0; i < n; ++i) problem.observed_values(i) = rng.normal();
        problem.lambda = rng.uniform(0.1, 1.0);
        problem.observed_position_set.resize(n);

        const LassoResult result = solve_lasso(problem, options);
        const Eigen::VectorXd closed =
            orthonormal_lasso_solution(q, problem.observed_values, problem.lambda);
        CHECK((result.code.weights - closed).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("solve_lasso returns zero above the critical lambda") {
    Rng rng(34);
    MaskedProblem problem = random_problem(rng, 10, 15, 0.0);
    const double critical =
        (2.0 * problem.sub_atoms.transpose() * problem.observed_values).cwiseAbs().maxCoeff();
    problem.lambda = 1.1 * critical;
    const LassoResult result = solve_lasso(problem);
    CHECK(result.converged);
    CHECK(result.code.weights.cwiseAbs().maxCoeff() == 0.0);
    CHECK(kkt_residual(problem, result.code) == 0.0);
}

TEST_CASE("solve_lasso with a single aligned atom recovers the norm") {
    Rng rng(35);
    Eigen::VectorXd b(12);
    for (int i = 0; i < 12; ++i) b(i) = rng.normal();
    MaskedProblem problem;
    problem.sub_atoms = b.normalized();
    problem.observed_values = b;
    problem.lambda = 0.0;
    problem.observed_position_set.resize(12);
    LassoOptions options;
    options.tol = 1e-10;
    const LassoResult result = solve_lasso(problem, options);
    CHECK(result.code.weights.size() == 1);
    CHECK(result.code.weights(0) == doctest::Approx(b.norm()).epsilon(1e-8));
}

TEST_CASE("solve_lasso objective is monotonically non-increasing") {
    Rng rng(36);
    for (int trial = 0; trial < 10; ++trial) {
        const MaskedProblem problem = random_problem(rng, 15, 30, 0.3);
        LassoOptions options;
        options.record_objective = true;
        options.max_iters = 500;
        const LassoResult result = solve_lasso(problem, options);
        REQUIRE(result.objective_trace.size() >= 2);
        for (size_t i = 1; i < result.objective_trace.size(); ++i)
            CHECK(result.objective_trace[i] <= result.objective_trace[i - 1]);
    }
}

TEST_CASE("kkt residual is below tol on 100 random problems") {
    Rng rng(37);
    LassoOptions options;
    options.tol = 1e-6;
    options.max_iters = 20000;
    for (int trial = 0; trial < 100; ++trial) {
        const int rows = 5 + rng.uniform_int(16); // up to 20
        const int k = 5 + rng.uniform_int(36);    // up to 40
        const MaskedProblem problem = random_problem(rng, rows, k, rng.uniform(0.05, 0.5));
        const LassoResult result = solve_lasso(problem, options);
        REQUIRE(result.converged);
        CHECK(result.kkt <= options.tol);
        CHECK(kkt_residual(problem, result.code) <= options.tol * (1.0 + 1e-9));
    }
}

TEST_CASE("perturbing a converged solution strictly increases the kkt residual") {
    Rng rng(38);
    LassoOptions options;
    options.tol = 1e-9;
    options.max_iters = 20000;
    for (int trial = 0; trial < 10; ++trial) {
        const MaskedProblem problem = random_problem(rng, 12, 20, 0.3);
        const LassoResult result = solve_lasso(problem, options);
        REQUIRE(result.converged);
        const double base = kkt_residual(problem, result.code);
        SparseCode perturbed = result.code;
        perturbed.weights(rng.uniform_int(20)) += 1e-3;
        CHECK(kkt_residual(problem, perturbed) > base);
    }
}

TEST_CASE("jointly scaling the target and lambda scales the solution") {
    Rng rng(39);
    LassoOptions options;
    options.tol = 1e-10;
    options.max_iters = 50000;
    const double s = 2.7;
    for (int trial = 0; trial < 10; ++trial) {
        MaskedProblem problem = sparse_ground_problem(rng, 12, 16, 0.4);
        const LassoResult base = solve_lasso(problem, options);

        MaskedProblem scaled = problem;
        scaled.observed_values *= s;
        scaled.lambda *= s;
        const LassoResult result = solve_lasso(scaled, options);
        CHECK((result.code.weights - s * base.code.weights).cwiseAbs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("reconstruct is the plain linear combination") {
    Rng rng(40);
    const Dictionary dict = random_dictionary(rng, 91, 24);

    SUBCASE("zero code gives the zero vector") {
        const EdmVector out = reconstruct(dict, SparseCode{Eigen::VectorXd::Zero(24)});
        CHECK(out.values.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("unit basis weight gives the atom back") {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(24);
        c(7) = 1.0;
        const EdmVector out = reconstruct(dict, SparseCode{c});
        CHECK((out.values - dict.atoms.col(7)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("an exact 3-sparse target is recovered through the masked problem") {
    Rng rng(41);
    const Dictionary dict = random_dictionary(rng, 91, 40);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd truth = Eigen::VectorXd::Zero(40);
        for (int s = 0; s < 3; ++s) truth(rng.uniform_int(40)) = rng.uniform(0.5, 2.0);
        const EdmVector target{dict.atoms * truth};

        const JointMask mask = JointMask::from_indices({rng.uniform_int(14)});
        const MaskedProblem problem = extract_subproblem(target, mask, dict, 1e-3);
        LassoOptions options;
        options.tol = 1e-9;
        options.max_iters = 50000;
        const LassoResult result = solve_lasso(problem, options);
        const EdmVector recovered = reconstruct(dict, result.code);
        CHECK((recovered.values - target.values).norm() / target.values.norm() <= 1e-3);
    }
}

TEST_CASE("recover_sparse preserves observed entries bit for bit") {
    Rng rng(42);
    const Dictionary dict = random_dictionary(rng, 91, 32);
    for (int trial = 0; trial < 10; ++trial) {
        const Pose pose = random_pose(rng, 14);
        const JointMask mask = JointMask::from_indices(
            {rng.uniform_int(14), rng.uniform_int(14)});
        const DistanceMatrix occluded = represent_average(pose, mask);
        const SparseRecoveryResult result = recover_sparse(occluded, mask, dict, 0.1);
        for (int pos : observed_positions(mask, 14)) {
            const auto [i, j] = tri_pair(pos, 14);
            CHECK(result.matrix.entries(i, j) == occluded.entries(i, j));
        }
        result.matrix.validate();
    }
}

TEST_CASE("recover_sparse with an empty mask returns the input exactly") {
    Rng rng(43);
    const Dictionary dict = random_dictionary(rng, 91, 16);
    const DistanceMatrix edm = random_edm(rng, 14);
    const SparseRecoveryResult result = recover_sparse(edm, JointMask::empty(), dict, 0.1);
    CHECK((result.matrix.entries.array() == edm.entries.array()).all());
}

TEST_CASE("dictionary validation catches broken atoms") {
    Rng rng(44);
    Dictionary dict = random_dictionary(rng, 10, 5);
    dict.validate();
    dict.atoms(0, 2) += 1e-3;
    CHECK_THROWS_AS(dict.validate(), std::invalid_argument);
}
