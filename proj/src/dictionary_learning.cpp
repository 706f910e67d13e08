#include "edmrec/dictionary_learning.hpp"

#include "edmrec/parallel.hpp"
#include "edmrec/pose_core.hpp"
#include "edmrec/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

namespace edmrec {

namespace {

constexpr double kUsageThreshold = 1e-8; // |c_j| above this counts as a use
constexpr size_t kMaxWorstTracked = 32;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

MaskedProblem full_problem(const Dictionary& dict, const Eigen::VectorXd& values,
                           double lambda) {
    MaskedProblem problem;
    problem.observed_values = values;
    problem.sub_atoms = dict.atoms;
    problem.observed_position_set.resize(dict.atom_length());
    for (int i = 0; i < dict.atom_length(); ++i) problem.observed_position_set[i] = i;
    problem.lambda = lambda;
    return problem;
}

} // namespace

LearnerState LearnerState::create(Dictionary dict, std::uint64_t seed) {
    LearnerState state;
    const int k = dict.k();
    const int len = dict.atom_length();
    state.dict = std::move(dict);
    state.code_cov = Eigen::MatrixXd::Zero(k, k);
    state.data_code = Eigen::MatrixXd::Zero(len, k);
    state.rng_seed = seed;
    state.epoch_usage.assign(k, 0);
    return state;
}

Dictionary init_dictionary(const std::vector<EdmVector>& samples, int k, std::uint64_t seed) {
    if (samples.empty())
        throw std::invalid_argument("cannot initialize a dictionary from zero samples");
    if (k < 1)
        throw std::invalid_argument("dictionary size must be positive");
    const int n = static_cast<int>(samples.size());
    const int len = samples[0].length();

    Rng rng(seed);
    std::vector<int> chosen;
    if (k <= n) {
        chosen = rng.sample_distinct(n, k);
    } else {
        chosen.resize(k);
        for (int i = 0; i < k; ++i) chosen[i] = rng.uniform_int(n);
    }

    Dictionary dict;
    dict.atoms.resize(len, k);
    dict.seed = seed;
    for (int j = 0; j < k; ++j) {
        const Eigen::VectorXd& src = samples[chosen[j]].values;
        if (src.size() != len)
            throw std::invalid_argument("samples have inconsistent lengths");
        const double norm = src.norm();
        if (norm < 1e-12)
            throw std::invalid_argument("cannot seed a dictionary atom from a zero sample");
        dict.atoms.col(j) = src / norm;
    }
    return dict;
}

void learn_step(LearnerState& state, const std::vector<EdmVector>& batch, double lambda,
                const LassoOptions& solver, int workers) {
    if (batch.empty()) return;
    const int k = state.dict.k();
    const int len = state.dict.atom_length();
    for (const EdmVector& sample : batch)
        if (sample.length() != len)
            throw std::invalid_argument("batch sample length does not match atom length");

    // Atoms are fixed across this batch's solves, so one Lipschitz
    // estimate serves every sample.
    LassoOptions batch_solver = solver;
    batch_solver.lipschitz = estimate_lipschitz(state.dict.atoms);

    struct Slot {
        Eigen::VectorXd code;
        double residual = 0.0;
    };
    std::vector<Slot> slots(batch.size());
    parallel_for(static_cast<int>(batch.size()), workers, [&](int i) {
        const MaskedProblem problem = full_problem(state.dict, batch[i].values, lambda);
        slots[i].code = solve_lasso(problem, batch_solver).code.weights;
        slots[i].residual = (batch[i].values - state.dict.atoms * slots[i].code).norm();
    });

    // Fold sufficient statistics in sample order.
    for (size_t i = 0; i < batch.size(); ++i) {
        const Eigen::VectorXd& c = slots[i].code;
        state.code_cov.noalias() += c * c.transpose();
        state.data_code.noalias() += batch[i].values * c.transpose();
        for (int j = 0; j < k; ++j)
            if (std::abs(c(j)) > kUsageThreshold) ++state.epoch_usage[j];

        state.worst.push_back({slots[i].residual, batch[i].values});
        std::sort(state.worst.begin(), state.worst.end(),
                  [](const auto& a, const auto& b) { return a.residual > b.residual; });
        if (state.worst.size() > kMaxWorstTracked) state.worst.resize(kMaxWorstTracked);
    }
    state.samples_seen += static_cast<long>(batch.size());

    // One block-coordinate pass over the atoms.
    for (int j = 0; j < k; ++j) {
        const double a_jj = state.code_cov(j, j);
        if (a_jj <= 0.0) continue;
        Eigen::VectorXd u = (state.data_code.col(j) - state.dict.atoms * state.code_cov.col(j)) / a_jj +
                            state.dict.atoms.col(j);
        state.dict.atoms.col(j) = u / std::max(u.norm(), 1.0);
    }
}

ObjectiveResult dictionary_objective(const Dictionary& dict,
                                     const std::vector<EdmVector>& samples, double lambda,
                                     const LassoOptions& solver, int workers) {
    if (samples.empty())
        throw std::invalid_argument("objective needs at least one sample");

    LassoOptions shared = solver;
    shared.lipschitz = estimate_lipschitz(dict.atoms);

    struct Slot {
        double value = 0.0;
        bool converged = true;
    };
    std::vector<Slot> slots(samples.size());
    parallel_for(static_cast<int>(samples.size()), workers, [&](int i) {
        const MaskedProblem problem = full_problem(dict, samples[i].values, lambda);
        const LassoResult res = solve_lasso(problem, shared);
        const double fit = (samples[i].values - dict.atoms * res.code.weights).squaredNorm();
        slots[i].value = 0.5 * (fit + lambda * res.code.weights.lpNorm<1>());
        slots[i].converged = res.converged;
    });

    ObjectiveResult out;
    for (const Slot& slot : slots) {
        out.value += slot.value;
        if (!slot.converged) ++out.non_converged;
    }
    out.value /= static_cast<double>(samples.size());
    return out;
}

LearnOutput learn_dictionary(const std::vector<EdmVector>& samples, const LearnConfig& config) {
    if (config.batch_size < 1)
        throw std::invalid_argument("batch size must be at least 1");
    if (static_cast<int>(samples.size()) < config.batch_size)
        throw std::invalid_argument("need at least batch_size samples");

    LearnOutput out;
    const auto total_start = Clock::now();
    out.dict = init_dictionary(samples, config.k, config.seed);
    out.dict.train_lambda = config.lambda;
    if (config.k < out.dict.atom_length())
        out.report.warnings.push_back(
            "k=" + std::to_string(config.k) + " is below the ambient dimension " +
            std::to_string(out.dict.atom_length()) + "; dictionary is not over-complete");

    LassoOptions solver;
    solver.tol = config.solver_tol;
    solver.max_iters = config.solver_max_iters;

    LearnerState state = LearnerState::create(std::move(out.dict), config.seed);
    const int n = static_cast<int>(samples.size());

    Rng rng(config.seed);
    const std::vector<int> val_indices = rng.sample_distinct(n, std::min(n, 256));
    std::vector<EdmVector> validation;
    validation.reserve(val_indices.size());
    for (int idx : val_indices) validation.push_back(samples[idx]);

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto epoch_start = Clock::now();
        std::fill(state.epoch_usage.begin(), state.epoch_usage.end(), 0);
        state.worst.clear();

        rng.shuffle(order);
        std::vector<EdmVector> batch;
        batch.reserve(config.batch_size);
        for (int start = 0; start < n; start += config.batch_size) {
            batch.clear();
            const int end = std::min(n, start + config.batch_size);
            for (int i = start; i < end; ++i) batch.push_back(samples[order[i]]);
            learn_step(state, batch, config.lambda, solver, config.workers);
        }

        // Replace atoms that went unused this epoch with the worst
        // reconstructed samples; their statistics restart from zero.
        EpochStats stats;
        if (!state.worst.empty()) {
            int next_source = 0;
            for (int j = 0; j < state.dict.k(); ++j) {
                if (state.epoch_usage[j] >= config.atom_replacement_threshold) continue;
                const Eigen::VectorXd& src =
                    state.worst[next_source % state.worst.size()].values;
                ++next_source;
                const double norm = src.norm();
                if (norm < 1e-12) continue;
                state.dict.atoms.col(j) = src / norm;
                state.code_cov.row(j).setZero();
                state.code_cov.col(j).setZero();
                state.data_code.col(j).setZero();
                ++stats.replaced_atoms;
            }
        }
        out.report.total_replacements += stats.replaced_atoms;

        stats.objective =
            dictionary_objective(state.dict, validation, config.lambda, solver, config.workers)
                .value;
        stats.seconds = seconds_since(epoch_start);
        out.report.epochs.push_back(stats);
    }

    out.dict = std::move(state.dict);
    out.dict.train_lambda = config.lambda;
    out.dict.seed = config.seed;
    out.report.total_seconds = seconds_since(total_start);
    return out;
}

double lipschitz_for_mask(const Dictionary& dict, const JointMask& mask, int joint_count) {
    const std::vector<int> observed = observed_positions(mask, joint_count);
    Eigen::MatrixXd sub(observed.size(), dict.k());
    for (size_t r = 0; r < observed.size(); ++r) sub.row(r) = dict.atoms.row(observed[r]);
    return estimate_lipschitz(sub);
}

std::vector<SweepRow> sweep_sizes(const std::vector<EdmVector>& train_samples,
                                  const std::vector<SweepCase>& test_cases,
                                  const std::vector<int>& sizes, const LearnConfig& base,
                                  double recover_lambda, const LassoOptions& recover_solver) {
    if (sizes.empty()) throw std::invalid_argument("sweep needs at least one size");
    if (test_cases.empty()) throw std::invalid_argument("sweep needs test cases");

    std::vector<SweepRow> rows;
    for (int size : sizes) {
        LearnConfig config = base;
        config.k = size;
        const LearnOutput learned = learn_dictionary(train_samples, config);

        std::map<std::vector<int>, double> lipschitz_cache;
        double err_sum = 0.0;
        double seconds = 0.0;
        for (const SweepCase& test : test_cases) {
            LassoOptions options = recover_solver;
            auto it = lipschitz_cache.find(test.mask.occluded);
            if (it == lipschitz_cache.end()) {
                const double lip = lipschitz_for_mask(learned.dict, test.mask,
                                                      test.ground_truth.size());
                it = lipschitz_cache.emplace(test.mask.occluded, lip).first;
            }
            options.lipschitz = it->second;

            const auto start = Clock::now();
            const SparseRecoveryResult recovered =
                recover_sparse(test.occluded, test.mask, learned.dict, recover_lambda, options);
            seconds += seconds_since(start);
            err_sum += err_ave(err_matrix(recovered.matrix, test.ground_truth));
        }

        SweepRow row;
        row.k = size;
        row.err = err_sum / static_cast<double>(test_cases.size());
        row.seconds_per_sample = seconds / static_cast<double>(test_cases.size());
        rows.push_back(row);
    }
    return rows;
}

} // namespace edmrec
