#pragma once

#include "edmrec/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace edmrec {

// Fully-convolutional EDM-to-EDM regressor:
// conv 5x5/2 -> relu -> conv 5x5/2 -> relu -> transposed conv 5x5/2 ->
// relu -> transposed conv 5x5/2 -> relu -> conv 1x1.
// For the default 14x14 input the spatial chain is 14 -> 7 -> 4 -> 7 -> 14
// with `channels` feature maps in between and a single map in and out.
struct NetConfig {
    int input_size = 14;
    int channels = 64;
    int kernel = 5;
    double weight_init_scale = 1.0;
};

// Spatial sizes after each of the five layers (input first).
std::vector<int> net_shape_chain(const NetConfig& config);

struct ConvLayer {
    // Convolutions store out_channels x (in_channels*k*k). Transposed
    // convolutions store the adjoint convolution's weights, i.e.
    // in_channels x (out_channels*k*k).
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias; // one per output channel
};

struct NetworkParams {
    NetConfig config;
    ConvLayer conv1, conv2, deconv1, deconv2, conv3;

    long parameter_count() const;
    void set_zero();
    void scale(double factor);
    void add_scaled(const NetworkParams& other, double factor); // this += factor*other
    bool all_finite() const;

    // Flat parameter view in declared tensor order, for gradient
    // checking and serialization.
    double get_flat(long index) const;
    void set_flat(long index, double value);
};

// Deterministic initialization: weights uniform in [-s, s] with
// s = weight_init_scale / sqrt(fan_in), biases zero.
NetworkParams net_init(const NetConfig& config, std::uint64_t seed);

// Raw (unsymmetrized) forward pass on one N x N matrix.
Eigen::MatrixXd net_forward(const NetworkParams& params, const Eigen::MatrixXd& input);

std::vector<Eigen::MatrixXd> net_forward_batch(const NetworkParams& params,
                                               const std::vector<Eigen::MatrixXd>& inputs);

struct EdmPair {
    Eigen::MatrixXd input;
    Eigen::MatrixXd target;
};

// Mean squared error over all batch entries on the raw output, plus the
// exact gradient for every parameter. Returns the loss.
double net_loss_and_grad(const NetworkParams& params, std::span<const EdmPair> batch,
                         NetworkParams& grads);

struct TrainConfig {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int epochs = 50;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double val_fraction = 0.1;
};

struct TrainCurvePoint {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct NetTrainResult {
    NetworkParams params;
    std::vector<TrainCurvePoint> curve;
};

// SGD with momentum and seeded shuffling. Throws if the loss goes
// non-finite.
NetTrainResult net_train(const NetworkParams& initial, const std::vector<EdmPair>& data,
                         const TrainConfig& config);

// Average with the transpose, zero the diagonal, clamp negatives.
DistanceMatrix symmetrize_and_clamp(const Eigen::MatrixXd& raw);

// max |raw - raw^T|, reported as a learned-symmetry diagnostic.
double asymmetry(const Eigen::MatrixXd& raw);

// forward -> symmetrize-and-clamp -> splice into occluded positions;
// observed entries are preserved exactly.
DistanceMatrix recover_with_net(const NetworkParams& params, const DistanceMatrix& occluded,
                                const JointMask& mask);

// Recovery net chained into the 2D->3D regression net; fine-tuning
// propagates gradients through both stages.
struct StackedParams {
    NetworkParams recovery;
    NetworkParams regression;
};

Eigen::MatrixXd stacked_forward(const StackedParams& params, const Eigen::MatrixXd& input);

struct StackTrainResult {
    StackedParams params;
    std::vector<TrainCurvePoint> curve;
};

StackTrainResult stack_finetune(const StackedParams& initial, const std::vector<EdmPair>& data,
                                const TrainConfig& config);

struct GradReport {
    double max_relative_error = 0.0;
    int parameter_checked_count = 0;
};

// Compares analytic gradients against central finite differences
// (step 1e-4) on `sample_count` randomly chosen parameters. The relative
// error denominator is floored at 1e-3 so near-zero gradients are
// compared on an absolute scale.
GradReport grad_check(const NetConfig& config, std::uint64_t seed, int sample_count);

} // namespace edmrec
