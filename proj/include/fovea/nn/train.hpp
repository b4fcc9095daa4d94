#pragma once

#include "fovea/idx.hpp"
#include "fovea/nn/network.hpp"

#include <chrono>
#include <cmath>
#include <functional>

namespace fovea::nn {

// Flattened, NN-ready dataset: x is [n x (c*h*w)] row-major.
template <typename T>
struct Samples {
    Shape3 shape;
    std::vector<T> x;
    std::vector<std::uint8_t> y;

    std::size_t size() const { return y.size(); }
    const T* sample(std::size_t i) const { return x.data() + i * shape.size(); }
};

template <typename T>
Samples<T> to_samples(const Dataset& ds) {
    if (ds.images.empty()) throw ShapeMismatch("to_samples: empty dataset");
    Samples<T> s;
    s.shape = {1, ds.images.front().h, ds.images.front().w};
    s.x.resize(ds.images.size() * static_cast<std::size_t>(s.shape.size()));
    s.y = ds.labels;
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        const Image& img = ds.images[i];
        if (img.h != s.shape.h || img.w != s.shape.w)
            throw ShapeMismatch("to_samples: ragged image dimensions");
        for (std::size_t j = 0; j < img.size(); ++j)
            s.x[i * img.size() + j] = static_cast<T>(img.data[j]);
    }
    return s;
}

enum class Optimizer { adam, sgd };

struct TrainConfig {
    int epochs = 5;
    int batch_size = 128;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    Optimizer optimizer = Optimizer::adam;
    std::uint64_t seed = 42;
    int eval_batch = 256;

    void validate() const {
        if (epochs < 1) throw Error("train: epochs must be >= 1");
        if (batch_size < 1) throw Error("train: batch_size must be >= 1");
        if (!(learning_rate > 0)) throw Error("train: learning_rate must be > 0");
    }
};

struct EpochStat {
    int epoch = 0;
    double train_loss = 0.0;
    double test_accuracy = 0.0;
    double seconds = 0.0; // wall clock; never serialized into result CSVs
};

struct TrainReport {
    std::vector<EpochStat> epochs;
    double final_test_accuracy = 0.0;
};

// Adam with per-parameter state; bias corrections computed in double once per
// step. The elementwise update itself runs through the kernels lane.
template <typename T>
class AdamState {
public:
    AdamState(std::size_t n, const TrainConfig& cfg)
        : cfg_(cfg), m_(n, T(0)), v_(n, T(0)) {}

    void step(std::vector<ParamView<T>>& params) {
        ++t_;
        const T inv_bc1 = static_cast<T>(1.0 / (1.0 - std::pow(cfg_.beta1, t_)));
        const T inv_bc2 = static_cast<T>(1.0 / (1.0 - std::pow(cfg_.beta2, t_)));
        std::size_t off = 0;
        for (auto& p : params) {
            T* m = m_.data() + off;
            T* v = v_.data() + off;
            kernels::adam_step(p.w, m, v, p.g, p.n, static_cast<T>(cfg_.learning_rate),
                               static_cast<T>(cfg_.beta1), static_cast<T>(cfg_.beta2),
                               static_cast<T>(cfg_.eps), inv_bc1, inv_bc2);
            off += p.n;
        }
    }

private:
    TrainConfig cfg_;
    std::vector<T> m_, v_;
    long t_ = 0;
};

template <typename T>
double evaluate(Network<T>& net, const Samples<T>& data, int eval_batch = 256) {
    if (data.size() == 0) throw ShapeMismatch("evaluate: empty dataset");
    if (!(net.input_shape() == data.shape))
        throw ArchMismatch("evaluate: sample shape does not match network input");
    const int classes = net.output_shape().size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); i += eval_batch) {
        const int b = static_cast<int>(std::min<std::size_t>(eval_batch, data.size() - i));
        const T* probs = net.forward(data.sample(i), b, /*train=*/false);
        for (int n = 0; n < b; ++n) {
            const T* row = probs + static_cast<std::size_t>(n) * classes;
            int arg = 0;
            for (int c = 1; c < classes; ++c)
                if (row[c] > row[arg]) arg = c;
            if (arg == data.y[i + n]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

// Shuffled minibatch training; fully deterministic given cfg.seed and a fixed
// thread count. The epoch hook (if set) observes progress.
template <typename T>
TrainReport train(Network<T>& net, const Samples<T>& train_data,
                  const Samples<T>& test_data, const TrainConfig& cfg,
                  const std::function<void(const EpochStat&)>& on_epoch = {}) {
    cfg.validate();
    if (train_data.size() == 0) throw ShapeMismatch("train: empty dataset");
    if (!(net.input_shape() == train_data.shape))
        throw ArchMismatch("train: sample shape does not match network input");

    net.reseed(cfg.seed);
    AdamState<T> adam(net.param_count(), cfg);
    auto params = net.params();
    Rng shuffle_rng(cfg.seed ^ 0x5DEECE66DULL);

    std::vector<std::uint32_t> order(train_data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<std::uint32_t>(i);

    const int in_size = train_data.shape.size();
    std::vector<T> batch_x(static_cast<std::size_t>(cfg.batch_size) * in_size);
    std::vector<std::uint8_t> batch_y(cfg.batch_size);

    TrainReport report;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t i = 0; i < order.size(); i += cfg.batch_size) {
            const int b = static_cast<int>(
                std::min<std::size_t>(cfg.batch_size, order.size() - i));
            for (int n = 0; n < b; ++n) {
                const std::uint32_t src = order[i + n];
                std::memcpy(batch_x.data() + static_cast<std::size_t>(n) * in_size,
                            train_data.sample(src), sizeof(T) * in_size);
                batch_y[n] = train_data.y[src];
            }
            const double loss = net.loss_and_grad(batch_x.data(), batch_y.data(), b);
            if (!std::isfinite(loss))
                throw Divergence("train: loss became non-finite at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(batches));
            if (cfg.optimizer == Optimizer::adam) {
                adam.step(params);
            } else {
                for (auto& p : params)
                    for (std::size_t j = 0; j < p.n; ++j)
                        p.w[j] -= static_cast<T>(cfg.learning_rate) * p.g[j];
            }
            loss_sum += loss;
            ++batches;
        }
        EpochStat stat;
        stat.epoch = epoch;
        stat.train_loss = loss_sum / static_cast<double>(batches);
        stat.test_accuracy =
            test_data.size() ? evaluate(net, test_data, cfg.eval_batch) : 0.0;
        stat.seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
        report.epochs.push_back(stat);
        if (on_epoch) on_epoch(stat);
    }
    report.final_test_accuracy =
        report.epochs.empty() ? 0.0 : report.epochs.back().test_accuracy;
    return report;
}

} // namespace fovea::nn
