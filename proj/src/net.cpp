#include "edmrec/net.hpp"

#include "edmrec/pose_core.hpp"
#include "edmrec/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace edmrec {

namespace {

// One strided convolution geometry; the transposed layers reuse it as
// the adjoint map (out -> in).
struct Geom {
    int in = 0;
    int out = 0;
    int kernel = 0;
    int stride = 2;
    int pad = 0;
};

Geom make_geom(int in, int kernel) {
    Geom g;
    g.in = in;
    g.kernel = kernel;
    g.pad = kernel / 2;
    g.out = (in + 2 * g.pad - kernel) / g.stride + 1;
    if (g.out < 1)
        throw std::invalid_argument("input size " + std::to_string(in) +
                                    " too small for kernel " + std::to_string(kernel));
    return g;
}

// Feature maps are (channels x in*in*batch); sample b occupies columns
// [b*in*in, (b+1)*in*in) with pixels flattened row-major. Column layout
// of the patch matrix: row (ky*k + kx)*channels + c.
void im2col(const Geom& g, const Eigen::MatrixXd& x, int batch, Eigen::MatrixXd& cols) {
    const int channels = static_cast<int>(x.rows());
    const int in_area = g.in * g.in;
    const int out_area = g.out * g.out;
    cols.setZero(channels * g.kernel * g.kernel, static_cast<long>(out_area) * batch);
    for (int b = 0; b < batch; ++b) {
        for (int oy = 0; oy < g.out; ++oy) {
            for (int ox = 0; ox < g.out; ++ox) {
                const long col = static_cast<long>(b) * out_area + oy * g.out + ox;
                for (int ky = 0; ky < g.kernel; ++ky) {
                    const int iy = oy * g.stride - g.pad + ky;
                    if (iy < 0 || iy >= g.in) continue;
                    for (int kx = 0; kx < g.kernel; ++kx) {
                        const int ix = ox * g.stride - g.pad + kx;
                        if (ix < 0 || ix >= g.in) continue;
                        const long icol = static_cast<long>(b) * in_area + iy * g.in + ix;
                        cols.col(col).segment((ky * g.kernel + kx) * channels, channels) =
                            x.col(icol);
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-add patches back onto the image grid.
void col2im(const Geom& g, const Eigen::MatrixXd& cols, int batch, int channels,
            Eigen::MatrixXd& x) {
    const int in_area = g.in * g.in;
    const int out_area = g.out * g.out;
    x.setZero(channels, static_cast<long>(in_area) * batch);
    for (int b = 0; b < batch; ++b) {
        for (int oy = 0; oy < g.out; ++oy) {
            for (int ox = 0; ox < g.out; ++ox) {
                const long col = static_cast<long>(b) * out_area + oy * g.out + ox;
                for (int ky = 0; ky < g.kernel; ++ky) {
                    const int iy = oy * g.stride - g.pad + ky;
                    if (iy < 0 || iy >= g.in) continue;
                    for (int kx = 0; kx < g.kernel; ++kx) {
                        const int ix = ox * g.stride - g.pad + kx;
                        if (ix < 0 || ix >= g.in) continue;
                        const long icol = static_cast<long>(b) * in_area + iy * g.in + ix;
                        x.col(icol) +=
                            cols.col(col).segment((ky * g.kernel + kx) * channels, channels);
                    }
                }
            }
        }
    }
}

inline void relu(const Eigen::MatrixXd& pre, Eigen::MatrixXd& post) {
    post = pre.cwiseMax(0.0);
}

inline void relu_backward(const Eigen::MatrixXd& pre, Eigen::MatrixXd& grad) {
    grad.array() *= (pre.array() > 0.0).cast<double>();
}

struct Cache {
    Eigen::MatrixXd x0, cols0;
    Eigen::MatrixXd a1_pre, a1, cols1;
    Eigen::MatrixXd a2_pre, a2;
    Eigen::MatrixXd a3_pre, a3;
    Eigen::MatrixXd a4_pre, a4;
    Eigen::MatrixXd out;
};

struct Workspace {
    Eigen::MatrixXd d_cols, g_cols;
    Eigen::MatrixXd g4, g3, g2, g1;
};

void forward_batched(const NetworkParams& p, const Eigen::MatrixXd& x0, int batch,
                     Cache& cache) {
    const Geom g_a = make_geom(p.config.input_size, p.config.kernel);
    const Geom g_b = make_geom(g_a.out, p.config.kernel);
    const int channels = p.config.channels;

    cache.x0 = x0;
    im2col(g_a, cache.x0, batch, cache.cols0);
    cache.a1_pre.noalias() = p.conv1.weights * cache.cols0;
    cache.a1_pre.colwise() += p.conv1.bias;
    relu(cache.a1_pre, cache.a1);

    im2col(g_b, cache.a1, batch, cache.cols1);
    cache.a2_pre.noalias() = p.conv2.weights * cache.cols1;
    cache.a2_pre.colwise() += p.conv2.bias;
    relu(cache.a2_pre, cache.a2);

    Eigen::MatrixXd d1_cols = p.deconv1.weights.transpose() * cache.a2;
    col2im(g_b, d1_cols, batch, channels, cache.a3_pre);
    cache.a3_pre.colwise() += p.deconv1.bias;
    relu(cache.a3_pre, cache.a3);

    Eigen::MatrixXd d2_cols = p.deconv2.weights.transpose() * cache.a3;
    col2im(g_a, d2_cols, batch, channels, cache.a4_pre);
    cache.a4_pre.colwise() += p.deconv2.bias;
    relu(cache.a4_pre, cache.a4);

    cache.out.noalias() = p.conv3.weights * cache.a4;
    cache.out.colwise() += p.conv3.bias;
}

// Accumulates raw (unnormalized) gradients into `grads`; pass
// g_input != nullptr to also get the gradient w.r.t. the network input.
void backward_batched(const NetworkParams& p, const Cache& cache, const Eigen::MatrixXd& g_out,
                      int batch, NetworkParams& grads, Workspace& ws,
                      Eigen::MatrixXd* g_input) {
    const Geom g_a = make_geom(p.config.input_size, p.config.kernel);
    const Geom g_b = make_geom(g_a.out, p.config.kernel);
    const int channels = p.config.channels;

    grads.conv3.weights.noalias() += g_out * cache.a4.transpose();
    grads.conv3.bias += g_out.rowwise().sum();
    ws.g4.noalias() = p.conv3.weights.transpose() * g_out;
    relu_backward(cache.a4_pre, ws.g4);

    grads.deconv2.bias += ws.g4.rowwise().sum();
    im2col(g_a, ws.g4, batch, ws.g_cols);
    grads.deconv2.weights.noalias() += cache.a3 * ws.g_cols.transpose();
    ws.g3.noalias() = p.deconv2.weights * ws.g_cols;
    relu_backward(cache.a3_pre, ws.g3);

    grads.deconv1.bias += ws.g3.rowwise().sum();
    im2col(g_b, ws.g3, batch, ws.g_cols);
    grads.deconv1.weights.noalias() += cache.a2 * ws.g_cols.transpose();
    ws.g2.noalias() = p.deconv1.weights * ws.g_cols;
    relu_backward(cache.a2_pre, ws.g2);

    grads.conv2.weights.noalias() += ws.g2 * cache.cols1.transpose();
    grads.conv2.bias += ws.g2.rowwise().sum();
    ws.g_cols.noalias() = p.conv2.weights.transpose() * ws.g2;
    col2im(g_b, ws.g_cols, batch, channels, ws.g1);
    relu_backward(cache.a1_pre, ws.g1);

    grads.conv1.weights.noalias() += ws.g1 * cache.cols0.transpose();
    grads.conv1.bias += ws.g1.rowwise().sum();
    if (g_input) {
        ws.g_cols.noalias() = p.conv1.weights.transpose() * ws.g1;
        col2im(g_a, ws.g_cols, batch, 1, *g_input);
    }
}

// Row-major flattening of a batch of square matrices into one wide map.
Eigen::MatrixXd pack_batch(std::span<const Eigen::MatrixXd> mats, int n) {
    const int area = n * n;
    Eigen::MatrixXd x(1, static_cast<long>(area) * mats.size());
    for (size_t b = 0; b < mats.size(); ++b) {
        if (mats[b].rows() != n || mats[b].cols() != n)
            throw std::invalid_argument("network input must be " + std::to_string(n) + "x" +
                                        std::to_string(n));
        for (int y = 0; y < n; ++y)
            for (int x_ = 0; x_ < n; ++x_)
                x(0, static_cast<long>(b) * area + y * n + x_) = mats[b](y, x_);
    }
    return x;
}

Eigen::MatrixXd unpack_one(const Eigen::MatrixXd& wide, int index, int n) {
    const int area = n * n;
    Eigen::MatrixXd m(n, n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) m(y, x) = wide(0, static_cast<long>(index) * area + y * n + x);
    return m;
}

void init_layer(ConvLayer& layer, int out_rows, int cols, int out_channels, int fan_in,
                double scale, Rng& rng) {
    layer.weights.resize(out_rows, cols);
    const double s = fan_in > 0 ? scale / std::sqrt(static_cast<double>(fan_in)) : 0.0;
    for (long i = 0; i < layer.weights.size(); ++i)
        layer.weights.data()[i] = rng.uniform(-s, s);
    layer.bias = Eigen::VectorXd::Zero(out_channels);
}

constexpr int kForwardChunk = 64;

template <typename Fn>
void visit_tensors(NetworkParams& p, Fn&& fn) {
    fn(p.conv1.weights);
    fn(p.conv1.bias);
    fn(p.conv2.weights);
    fn(p.conv2.bias);
    fn(p.deconv1.weights);
    fn(p.deconv1.bias);
    fn(p.deconv2.weights);
    fn(p.deconv2.bias);
    fn(p.conv3.weights);
    fn(p.conv3.bias);
}

template <typename Fn>
void visit_tensors(const NetworkParams& p, Fn&& fn) {
    fn(p.conv1.weights);
    fn(p.conv1.bias);
    fn(p.conv2.weights);
    fn(p.conv2.bias);
    fn(p.deconv1.weights);
    fn(p.deconv1.bias);
    fn(p.deconv2.weights);
    fn(p.deconv2.bias);
    fn(p.conv3.weights);
    fn(p.conv3.bias);
}

} // namespace

std::vector<int> net_shape_chain(const NetConfig& config) {
    const Geom g_a = make_geom(config.input_size, config.kernel);
    const Geom g_b = make_geom(g_a.out, config.kernel);
    return {config.input_size, g_a.out, g_b.out, g_b.in, g_a.in};
}

long NetworkParams::parameter_count() const {
    long total = 0;
    visit_tensors(*this, [&](const auto& t) { total += t.size(); });
    return total;
}

void NetworkParams::set_zero() {
    visit_tensors(*this, [](auto& t) { t.setZero(); });
}

void NetworkParams::scale(double factor) {
    visit_tensors(*this, [factor](auto& t) { t *= factor; });
}

void NetworkParams::add_scaled(const NetworkParams& other, double factor) {
    conv1.weights += factor * other.conv1.weights;
    conv1.bias += factor * other.conv1.bias;
    conv2.weights += factor * other.conv2.weights;
    conv2.bias += factor * other.conv2.bias;
    deconv1.weights += factor * other.deconv1.weights;
    deconv1.bias += factor * other.deconv1.bias;
    deconv2.weights += factor * other.deconv2.weights;
    deconv2.bias += factor * other.deconv2.bias;
    conv3.weights += factor * other.conv3.weights;
    conv3.bias += factor * other.conv3.bias;
}

bool NetworkParams::all_finite() const {
    bool ok = true;
    visit_tensors(*this, [&](const auto& t) { ok = ok && t.allFinite(); });
    return ok;
}

double NetworkParams::get_flat(long index) const {
    double value = 0.0;
    bool found = false;
    visit_tensors(*this, [&](const auto& t) {
        if (found) return;
        if (index < t.size()) {
            value = t.data()[index];
            found = true;
        } else {
            index -= t.size();
        }
    });
    if (!found) throw std::out_of_range("parameter index out of range");
    return value;
}

void NetworkParams::set_flat(long index, double value) {
    bool found = false;
    visit_tensors(*this, [&](auto& t) {
        if (found) return;
        if (index < t.size()) {
            t.data()[index] = value;
            found = true;
        } else {
            index -= t.size();
        }
    });
    if (!found) throw std::out_of_range("parameter index out of range");
}

NetworkParams net_init(const NetConfig& config, std::uint64_t seed) {
    if (config.channels < 1) throw std::invalid_argument("channels must be positive");
    const Geom g_a = make_geom(config.input_size, config.kernel);
    make_geom(g_a.out, config.kernel); // validates the second reduction
    const int c = config.channels;
    const int kk = config.kernel * config.kernel;

    NetworkParams p;
    p.config = config;
    Rng rng(seed);
    init_layer(p.conv1, c, kk, c, kk, config.weight_init_scale, rng);
    init_layer(p.conv2, c, c * kk, c, c * kk, config.weight_init_scale, rng);
    init_layer(p.deconv1, c, c * kk, c, c * kk, config.weight_init_scale, rng);
    init_layer(p.deconv2, c, c * kk, c, c * kk, config.weight_init_scale, rng);
    init_layer(p.conv3, 1, c, 1, c, config.weight_init_scale, rng);
    return p;
}

Eigen::MatrixXd net_forward(const NetworkParams& params, const Eigen::MatrixXd& input) {
    const int n = params.config.input_size;
    const std::vector<Eigen::MatrixXd> one{input};
    Cache cache;
    forward_batched(params, pack_batch(std::span(one.data(), 1), n), 1, cache);
    return unpack_one(cache.out, 0, n);
}

std::vector<Eigen::MatrixXd> net_forward_batch(const NetworkParams& params,
                                               const std::vector<Eigen::MatrixXd>& inputs) {
    const int n = params.config.input_size;
    std::vector<Eigen::MatrixXd> out;
    out.reserve(inputs.size());
    Cache cache;
    for (size_t start = 0; start < inputs.size(); start += kForwardChunk) {
        const int count = static_cast<int>(std::min<size_t>(kForwardChunk, inputs.size() - start));
        forward_batched(params, pack_batch(std::span(inputs.data() + start, count), n), count,
                        cache);
        for (int i = 0; i < count; ++i) out.push_back(unpack_one(cache.out, i, n));
    }
    return out;
}

double net_loss_and_grad(const NetworkParams& params, std::span<const EdmPair> batch,
                         NetworkParams& grads) {
    if (batch.empty()) throw std::invalid_argument("loss needs a non-empty batch");
    const int n = params.config.input_size;
    grads = params;
    grads.set_zero();

    double sq_sum = 0.0;
    Cache cache;
    Workspace ws;
    std::vector<Eigen::MatrixXd> ins, tgts;
    for (size_t start = 0; start < batch.size(); start += kForwardChunk) {
        const int count = static_cast<int>(std::min<size_t>(kForwardChunk, batch.size() - start));
        ins.clear();
        tgts.clear();
        for (int i = 0; i < count; ++i) {
            ins.push_back(batch[start + i].input);
            tgts.push_back(batch[start + i].target);
        }
        forward_batched(params, pack_batch(std::span(ins.data(), ins.size()), n), count, cache);
        const Eigen::MatrixXd target = pack_batch(std::span(tgts.data(), tgts.size()), n);
        Eigen::MatrixXd g_out = cache.out - target;
        sq_sum += g_out.squaredNorm();
        g_out *= 2.0;
        backward_batched(params, cache, g_out, count, grads, ws, nullptr);
    }

    const double denom = static_cast<double>(batch.size()) * n * n;
    grads.scale(1.0 / denom);
    return sq_sum / denom;
}

namespace {

double net_eval_loss(const NetworkParams& params, const std::vector<EdmPair>& pairs) {
    if (pairs.empty()) return 0.0;
    const int n = params.config.input_size;
    double sq_sum = 0.0;
    Cache cache;
    std::vector<Eigen::MatrixXd> ins, tgts;
    for (size_t start = 0; start < pairs.size(); start += kForwardChunk) {
        const int count = static_cast<int>(std::min<size_t>(kForwardChunk, pairs.size() - start));
        ins.clear();
        tgts.clear();
        for (int i = 0; i < count; ++i) {
            ins.push_back(pairs[start + i].input);
            tgts.push_back(pairs[start + i].target);
        }
        forward_batched(params, pack_batch(std::span(ins.data(), ins.size()), n), count, cache);
        sq_sum += (cache.out - pack_batch(std::span(tgts.data(), tgts.size()), n)).squaredNorm();
    }
    return sq_sum / (static_cast<double>(pairs.size()) * n * n);
}

} // namespace

NetTrainResult net_train(const NetworkParams& initial, const std::vector<EdmPair>& data,
                         const TrainConfig& config) {
    if (data.empty()) throw std::invalid_argument("training needs data");
    if (config.learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
    if (config.batch_size < 1) throw std::invalid_argument("batch size must be at least 1");

    Rng rng(config.seed);
    const int n_total = static_cast<int>(data.size());
    std::vector<int> indices(n_total);
    for (int i = 0; i < n_total; ++i) indices[i] = i;
    rng.shuffle(indices);

    int val_count = static_cast<int>(std::lround(config.val_fraction * n_total));
    val_count = std::max(0, std::min(val_count, n_total - 1));
    std::vector<EdmPair> validation;
    validation.reserve(val_count);
    for (int i = 0; i < val_count; ++i) validation.push_back(data[indices[i]]);
    std::vector<int> train_order(indices.begin() + val_count, indices.end());

    NetTrainResult result;
    result.params = initial;
    NetworkParams velocity = initial;
    velocity.set_zero();
    NetworkParams grads = initial;

    std::vector<EdmPair> batch;
    batch.reserve(config.batch_size);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(train_order);
        double loss_acc = 0.0;
        for (size_t start = 0; start < train_order.size(); start += config.batch_size) {
            batch.clear();
            const size_t end = std::min(train_order.size(), start + config.batch_size);
            for (size_t i = start; i < end; ++i) batch.push_back(data[train_order[i]]);

            const double loss = net_loss_and_grad(result.params, batch, grads);
            if (!std::isfinite(loss))
                throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch starting at sample " +
                                         std::to_string(start));
            loss_acc += loss * static_cast<double>(batch.size());

            velocity.scale(config.momentum);
            velocity.add_scaled(grads, -config.learning_rate);
            result.params.add_scaled(velocity, 1.0);
        }

        TrainCurvePoint point;
        point.epoch = epoch;
        point.train_loss = train_order.empty() ? 0.0
                                               : loss_acc / static_cast<double>(train_order.size());
        point.val_loss =
            validation.empty() ? point.train_loss : net_eval_loss(result.params, validation);
        result.curve.push_back(point);
    }
    return result;
}

DistanceMatrix symmetrize_and_clamp(const Eigen::MatrixXd& raw) {
    if (raw.rows() != raw.cols())
        throw std::invalid_argument("symmetrize expects a square matrix");
    Eigen::MatrixXd sym = ((raw + raw.transpose()) / 2.0).cwiseMax(0.0);
    sym.diagonal().setZero();
    return DistanceMatrix{std::move(sym)};
}

double asymmetry(const Eigen::MatrixXd& raw) {
    return (raw - raw.transpose()).cwiseAbs().maxCoeff();
}

DistanceMatrix recover_with_net(const NetworkParams& params, const DistanceMatrix& occluded,
                                const JointMask& mask) {
    const DistanceMatrix predicted =
        symmetrize_and_clamp(net_forward(params, occluded.entries));
    return assemble_final(occluded, predicted, mask);
}

Eigen::MatrixXd stacked_forward(const StackedParams& params, const Eigen::MatrixXd& input) {
    return net_forward(params.regression, net_forward(params.recovery, input));
}

StackTrainResult stack_finetune(const StackedParams& initial, const std::vector<EdmPair>& data,
                                const TrainConfig& config) {
    if (data.empty()) throw std::invalid_argument("fine-tuning needs data");
    const int n = initial.recovery.config.input_size;
    if (initial.regression.config.input_size != n)
        throw std::invalid_argument("stacked networks disagree on input size");

    Rng rng(config.seed);
    const int n_total = static_cast<int>(data.size());
    std::vector<int> indices(n_total);
    for (int i = 0; i < n_total; ++i) indices[i] = i;
    rng.shuffle(indices);

    int val_count = static_cast<int>(std::lround(config.val_fraction * n_total));
    val_count = std::max(0, std::min(val_count, n_total - 1));
    std::vector<EdmPair> validation;
    for (int i = 0; i < val_count; ++i) validation.push_back(data[indices[i]]);
    std::vector<int> train_order(indices.begin() + val_count, indices.end());

    StackTrainResult result;
    result.params = initial;
    StackedParams velocity = initial;
    velocity.recovery.set_zero();
    velocity.regression.set_zero();
    StackedParams grads = initial;

    auto eval_loss = [&](const StackedParams& p, const std::vector<EdmPair>& pairs) {
        if (pairs.empty()) return 0.0;
        double sq = 0.0;
        for (const EdmPair& pair : pairs)
            sq += (stacked_forward(p, pair.input) - pair.target).squaredNorm();
        return sq / (static_cast<double>(pairs.size()) * n * n);
    };

    Cache cache1, cache2;
    Workspace ws1, ws2;
    std::vector<Eigen::MatrixXd> ins, tgts;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(train_order);
        double loss_acc = 0.0;
        for (size_t start = 0; start < train_order.size(); start += config.batch_size) {
            const size_t end = std::min(train_order.size(), start + config.batch_size);
            const int count = static_cast<int>(end - start);
            ins.clear();
            tgts.clear();
            for (size_t i = start; i < end; ++i) {
                ins.push_back(data[train_order[i]].input);
                tgts.push_back(data[train_order[i]].target);
            }

            grads.recovery.set_zero();
            grads.regression.set_zero();
            forward_batched(result.params.recovery,
                            pack_batch(std::span(ins.data(), ins.size()), n), count, cache1);
            forward_batched(result.params.regression, cache1.out, count, cache2);
            Eigen::MatrixXd g_out =
                cache2.out - pack_batch(std::span(tgts.data(), tgts.size()), n);
            const double denom = static_cast<double>(count) * n * n;
            const double loss = g_out.squaredNorm() / denom;
            if (!std::isfinite(loss))
                throw std::runtime_error("fine-tuning diverged: non-finite loss at epoch " +
                                         std::to_string(epoch));
            loss_acc += loss * count;
            g_out *= 2.0 / denom;

            Eigen::MatrixXd g_mid;
            backward_batched(result.params.regression, cache2, g_out, count, grads.regression,
                             ws2, &g_mid);
            backward_batched(result.params.recovery, cache1, g_mid, count, grads.recovery, ws1,
                             nullptr);

            velocity.recovery.scale(config.momentum);
            velocity.recovery.add_scaled(grads.recovery, -config.learning_rate);
            result.params.recovery.add_scaled(velocity.recovery, 1.0);
            velocity.regression.scale(config.momentum);
            velocity.regression.add_scaled(grads.regression, -config.learning_rate);
            result.params.regression.add_scaled(velocity.regression, 1.0);
        }

        TrainCurvePoint point;
        point.epoch = epoch;
        point.train_loss =
            train_order.empty() ? 0.0 : loss_acc / static_cast<double>(train_order.size());
        point.val_loss = validation.empty() ? point.train_loss
                                            : eval_loss(result.params, validation);
        result.curve.push_back(point);
    }
    return result;
}

GradReport grad_check(const NetConfig& config, std::uint64_t seed, int sample_count) {
    NetworkParams params = net_init(config, seed);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);

    // Biases start at zero; jitter them so their gradients are exercised
    // at a generic point.
    const long total = params.parameter_count();
    for (long i = 0; i < total; ++i)
        params.set_flat(i, params.get_flat(i) + 0.02 * rng.normal());

    const int n = config.input_size;
    std::vector<EdmPair> batch(2);
    for (EdmPair& pair : batch) {
        pair.input.resize(n, n);
        pair.target.resize(n, n);
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                pair.input(y, x) = rng.uniform(0.0, 2.0);
                pair.target(y, x) = rng.uniform(0.0, 2.0);
            }
    }

    NetworkParams analytic = params;
    net_loss_and_grad(params, batch, analytic);

    const double h = 1e-4;
    GradReport report;
    report.parameter_checked_count = sample_count;
    NetworkParams probe = params;
    NetworkParams scratch = params;
    for (int t = 0; t < sample_count; ++t) {
        const long idx = static_cast<long>(rng.uniform_int(static_cast<int>(total)));
        const double original = params.get_flat(idx);

        probe.set_flat(idx, original + h);
        const double loss_plus = net_loss_and_grad(probe, batch, scratch);
        probe.set_flat(idx, original - h);
        const double loss_minus = net_loss_and_grad(probe, batch, scratch);
        probe.set_flat(idx, original);

        const double numeric = (loss_plus - loss_minus) / (2.0 * h);
        const double a = analytic.get_flat(idx);
        const double rel =
            std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-3});
        report.max_relative_error = std::max(report.max_relative_error, rel);
    }
    return report;
}

} // namespace edmrec
