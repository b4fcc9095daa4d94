#pragma once

#include "fovea/nn/layers.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>

namespace fovea::nn {

// Ordered differentiable layers over NCHW activations. A Network is
// single-writer: training mutates it; concurrent use is safe only for eval on
// a const instance per the layer implementations (which parallelize
// internally but keep the instance-level call sequential).
template <typename T>
class Network {
public:
    Network(Shape3 input, std::uint64_t seed) : input_(input), seed_(seed), rng_(seed) {}

    Shape3 input_shape() const { return input_; }
    Shape3 output_shape() const { return layers_.empty() ? input_ : layers_.back()->out_shape(); }
    std::uint64_t seed() const { return seed_; }
    std::size_t layer_count() const { return layers_.size(); }
    Layer<T>& layer(std::size_t i) { return *layers_[i]; }

    void add(std::unique_ptr<Layer<T>> layer) {
        const Shape3 expect = output_shape();
        if (!(layer->in_shape() == expect))
            throw ShapeMismatch("network: layer input shape does not chain");
        layers_.push_back(std::move(layer));
    }

    // Draws every parameter from the seeded stream in declaration order.
    void init_params() {
        rng_ = Rng(seed_);
        for (auto& l : layers_) l->init_params(rng_);
    }

    // Restarts the rng stream (dropout masks); used by the training loop and
    // by gradient checks that need a frozen stochastic forward.
    void reseed(std::uint64_t s) { rng_ = Rng(s); }

    std::vector<ParamView<T>> params() {
        std::vector<ParamView<T>> out;
        for (auto& l : layers_) l->collect_params(out);
        return out;
    }

    std::size_t param_count() {
        std::size_t n = 0;
        for (const auto& p : params()) n += p.n;
        return n;
    }

    // in: [batch x input_size] row-major; returns pointer to the final
    // activation buffer [batch x output_size], valid until the next forward.
    const T* forward(const T* in, int batch, bool train) {
        ensure_buffers(batch);
        std::memcpy(acts_[0].data(), in,
                    static_cast<std::size_t>(batch) * input_.size() * sizeof(T));
        for (std::size_t i = 0; i < layers_.size(); ++i)
            layers_[i]->forward(acts_[i].data(), acts_[i + 1].data(), batch, train, rng_);
        return acts_.back().data();
    }

    Tensor<T> forward(const Tensor<T>& batch, bool train = false) {
        if (batch.shape.empty()) throw ShapeMismatch("forward: empty tensor");
        const int n = batch.shape[0];
        const std::size_t per = batch.numel() / (n ? n : 1);
        if (per != static_cast<std::size_t>(input_.size()))
            throw ShapeMismatch("forward: batch sample size does not match input shape");
        const T* out = forward(batch.data.data(), n, train);
        Tensor<T> probs({n, output_shape().size()});
        std::copy(out, out + probs.numel(), probs.data.begin());
        return probs;
    }

    // dLoss/d(final activation) in, gradients populated layer by layer.
    void backward(const T* dout, int batch) {
        const std::size_t last = layers_.size();
        dacts_[last].assign(dacts_[last].size(), T(0));
        std::memcpy(dacts_[last].data(), dout,
                    static_cast<std::size_t>(batch) * output_shape().size() * sizeof(T));
        for (std::size_t i = layers_.size(); i-- > 0;) {
            T* din = i == 0 ? nullptr : dacts_[i].data();
            layers_[i]->backward(acts_[i].data(), dacts_[i + 1].data(), din, batch);
        }
    }

    // Mean categorical cross-entropy over the batch; fills parameter
    // gradients. Probabilities are clamped at 1e-12 inside the log.
    double loss_and_grad(const T* in, const std::uint8_t* labels, int batch) {
        const int classes = output_shape().size();
        const T* probs = forward(in, batch, true);
        double loss = 0.0;
        std::vector<T> dprobs(static_cast<std::size_t>(batch) * classes, T(0));
        const T floor = static_cast<T>(1e-12);
        for (int n = 0; n < batch; ++n) {
            if (labels[n] >= classes)
                throw ShapeMismatch("loss: label out of range");
            T p = probs[static_cast<std::size_t>(n) * classes + labels[n]];
            if (p < floor) p = floor;
            loss -= std::log(static_cast<double>(p));
            dprobs[static_cast<std::size_t>(n) * classes + labels[n]] =
                -T(1) / (static_cast<T>(batch) * p);
        }
        loss /= batch;
        backward(dprobs.data(), batch);
        return loss;
    }

    nlohmann::json descriptor() const {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& l : layers_) layers.push_back(l->descriptor());
        return {{"format", 1},
                {"input", {input_.c, input_.h, input_.w}},
                {"n_layers", layers_.size()},
                {"layers", layers}};
    }

private:
    void ensure_buffers(int batch) {
        if (batch <= cap_) return;
        cap_ = batch;
        acts_.resize(layers_.size() + 1);
        dacts_.resize(layers_.size() + 1);
        acts_[0].resize(static_cast<std::size_t>(batch) * input_.size());
        dacts_[0].clear();
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const std::size_t n = static_cast<std::size_t>(batch) * layers_[i]->out_shape().size();
            acts_[i + 1].resize(n);
            dacts_[i + 1].resize(n);
        }
    }

    Shape3 input_;
    std::uint64_t seed_;
    Rng rng_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::vector<std::vector<T>> acts_, dacts_;
    int cap_ = 0;
};

// The experiment CNN: conv3x3x32 / relu / conv3x3x64 / relu / maxpool2x2 /
// dropout .25 / flatten / dense 128 / relu / dropout .5 / dense 10 / softmax.
// Dense dims adapt to the input raster so compressed log-polar grids reuse
// the same constructor.
template <typename T>
Network<T> make_mnist_cnn(int in_h, int in_w, std::uint64_t seed) {
    if (in_h < 6 || in_w < 6)
        throw ShapeMismatch("make_mnist_cnn: input must be at least 6x6");
    Network<T> net({1, in_h, in_w}, seed);
    auto shape = [&net] { return net.output_shape(); };
    net.add(std::make_unique<Conv2d<T>>(shape(), 32));
    net.add(std::make_unique<Relu<T>>(shape()));
    net.add(std::make_unique<Conv2d<T>>(shape(), 64));
    net.add(std::make_unique<Relu<T>>(shape()));
    net.add(std::make_unique<MaxPool2<T>>(shape()));
    net.add(std::make_unique<Dropout<T>>(shape(), 0.25));
    net.add(std::make_unique<Flatten<T>>(shape()));
    net.add(std::make_unique<Dense<T>>(shape(), 128));
    net.add(std::make_unique<Relu<T>>(shape()));
    net.add(std::make_unique<Dropout<T>>(shape(), 0.5));
    net.add(std::make_unique<Dense<T>>(shape(), 10, /*head=*/true));
    net.add(std::make_unique<Softmax<T>>(shape()));
    net.init_params();
    return net;
}

// Rebuilds a network from its JSON descriptor. Throws ArchMismatch on
// unknown kinds or inconsistent fields.
template <typename T>
Network<T> network_from_descriptor(const nlohmann::json& d, std::uint64_t seed) {
    try {
        const auto& input = d.at("input");
        Network<T> net({input.at(0), input.at(1), input.at(2)}, seed);
        const auto& layers = d.at("layers");
        if (d.at("n_layers").get<std::size_t>() != layers.size())
            throw ArchMismatch("descriptor: n_layers does not match layer list");
        for (const auto& l : layers) {
            const std::string kind = l.at("kind");
            const Shape3 s = net.output_shape();
            if (kind == "conv2d")
                net.add(std::make_unique<Conv2d<T>>(s, l.at("out_channels").get<int>()));
            else if (kind == "relu")
                net.add(std::make_unique<Relu<T>>(s));
            else if (kind == "maxpool")
                net.add(std::make_unique<MaxPool2<T>>(s));
            else if (kind == "dropout")
                net.add(std::make_unique<Dropout<T>>(s, l.at("rate").get<double>()));
            else if (kind == "flatten")
                net.add(std::make_unique<Flatten<T>>(s));
            else if (kind == "dense")
                net.add(std::make_unique<Dense<T>>(s, l.at("units").get<int>(),
                                                   l.value("head", false)));
            else if (kind == "softmax")
                net.add(std::make_unique<Softmax<T>>(s));
            else
                throw ArchMismatch("descriptor: unknown layer kind '" + kind + "'");
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw ArchMismatch(std::string("descriptor: ") + e.what());
    }
}

// --- weight file -------------------------------------------------------------
// Layout: 8-byte magic "FOVEAWT" + version byte, u32 descriptor length,
// descriptor JSON (UTF-8), then parameter tensors in declaration order as
// little-endian float32.

inline constexpr char kWeightMagic[8] = {'F', 'O', 'V', 'E', 'A', 'W', 'T', 1};

void save_weights(Network<float>& net, const std::string& path);
Network<float> load_weights(const std::string& path);

} // namespace fovea::nn
