#pragma once

#include "fovea/kernels/kernels.hpp"
#include "fovea/nn/tensor.hpp"
#include "fovea/parallel.hpp"
#include "fovea/rng.hpp"

#include "json.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

namespace fovea::nn {

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual const char* kind() const = 0;
    virtual Shape3 in_shape() const = 0;
    virtual Shape3 out_shape() const = 0;

    // in: [batch x in_size], out: [batch x out_size]. rng is consumed only in
    // train mode (dropout); draws happen on the calling thread so seeded runs
    // are reproducible.
    virtual void forward(const T* in, T* out, int batch, bool train, Rng& rng) = 0;

    // din may be null for the first layer. Parameter gradients are set (not
    // accumulated) for the batch. Uses state cached by the last forward.
    virtual void backward(const T* in, const T* dout, T* din, int batch) = 0;

    virtual void collect_params(std::vector<ParamView<T>>& out) {}
    virtual void init_params(Rng&) {}
    virtual nlohmann::json descriptor() const {
        return {{"kind", kind()}};
    }
};

// --- conv2d, 3x3, valid padding, stride 1, NCHW ---------------------------

template <typename T>
class Conv2d final : public Layer<T> {
public:
    static constexpr int K = 3;

    Conv2d(Shape3 in, int out_channels) : in_(in), out_c_(out_channels) {
        if (in.h < K || in.w < K)
            throw ShapeMismatch("conv2d: input smaller than 3x3 kernel");
        out_ = {out_c_, in.h - K + 1, in.w - K + 1};
        kdim_ = in_.c * K * K;
        w_.resize(static_cast<std::size_t>(out_c_) * kdim_);
        b_.resize(out_c_);
        gw_.resize(w_.size());
        gb_.resize(b_.size());
    }

    const char* kind() const override { return "conv2d"; }
    Shape3 in_shape() const override { return in_; }
    Shape3 out_shape() const override { return out_; }

    void init_params(Rng& rng) override {
        // fan-in scaled Gaussian (relu follows), zero biases
        const double std = std::sqrt(2.0 / kdim_);
        for (auto& v : w_) v = static_cast<T>(rng.gaussian(0.0, std));
        for (auto& v : b_) v = T(0);
    }

    void collect_params(std::vector<ParamView<T>>& out) override {
        out.push_back({w_.data(), gw_.data(), w_.size(), "conv.w"});
        out.push_back({b_.data(), gb_.data(), b_.size(), "conv.b"});
    }

    nlohmann::json descriptor() const override {
        return {{"kind", kind()}, {"out_channels", out_c_}, {"kernel", K}};
    }

    void forward(const T* in, T* out, int batch, bool train, Rng&) override {
        const int in_size = in_.size();
        const int out_size = out_.size();
        const int ohw = out_.h * out_.w;
        const std::size_t cols_n = static_cast<std::size_t>(kdim_) * ohw;
        // keep the unfolded input around for the weight-gradient pass
        cached_batch_ = train ? batch : 0;
        if (train) cols_cache_.resize(cols_n * batch);
        parallel_for(batch, [&](std::int64_t b0, std::int64_t b1, int slot) {
            std::vector<T>& cols = cols_ws(slot);
            if (!train) cols.resize(cols_n);
            for (std::int64_t n = b0; n < b1; ++n) {
                T* colp = train ? cols_cache_.data() + n * cols_n : cols.data();
                im2col(in + n * in_size, colp);
                T* y = out + n * out_size;
                kernels::gemm(out_c_, ohw, kdim_, w_.data(), kdim_, false,
                              colp, ohw, false, y, ohw, false);
                for (int co = 0; co < out_c_; ++co) {
                    const T bias = b_[co];
                    T* row = y + static_cast<std::size_t>(co) * ohw;
                    for (int i = 0; i < ohw; ++i) row[i] += bias;
                }
            }
        });
    }

    void backward(const T* in, const T* dout, T* din, int batch) override {
        const int in_size = in_.size();
        const int out_size = out_.size();
        const int ohw = out_.h * out_.w;
        const std::size_t cols_n = static_cast<std::size_t>(kdim_) * ohw;
        const bool cached = cached_batch_ == batch;
        const int threads = ThreadPool::instance().threads();
        // per-slot gradient buffers, reduced in slot order afterwards
        std::vector<std::vector<T>> gw_t(threads), gb_t(threads);
        parallel_for(batch, [&](std::int64_t b0, std::int64_t b1, int slot) {
            std::vector<T>& cols = cols_ws(slot);
            std::vector<T>& dcols = dcols_ws(slot);
            if (!cached) cols.resize(cols_n);
            gw_t[slot].assign(w_.size(), T(0));
            gb_t[slot].assign(b_.size(), T(0));
            if (din) dcols.resize(cols_n);
            for (std::int64_t n = b0; n < b1; ++n) {
                const T* dy = dout + n * out_size;
                const T* colp;
                if (cached) {
                    colp = cols_cache_.data() + n * cols_n;
                } else {
                    im2col(in + n * in_size, cols.data());
                    colp = cols.data();
                }
                // dW += dY * cols^T
                kernels::gemm(out_c_, kdim_, ohw, dy, ohw, false, colp,
                              ohw, true, gw_t[slot].data(), kdim_, true);
                for (int co = 0; co < out_c_; ++co) {
                    T s = T(0);
                    const T* row = dy + static_cast<std::size_t>(co) * ohw;
                    for (int i = 0; i < ohw; ++i) s += row[i];
                    gb_t[slot][co] += s;
                }
                if (din) {
                    // dcols = W^T * dY, then scatter back to the input raster
                    kernels::gemm(kdim_, ohw, out_c_, w_.data(), kdim_, true, dy,
                                  ohw, false, dcols.data(), ohw, false);
                    col2im(dcols.data(), din + n * in_size);
                }
            }
        });
        std::memset(gw_.data(), 0, gw_.size() * sizeof(T));
        std::memset(gb_.data(), 0, gb_.size() * sizeof(T));
        for (int t = 0; t < threads; ++t) {
            if (gw_t[t].empty()) continue;
            for (std::size_t i = 0; i < gw_.size(); ++i) gw_[i] += gw_t[t][i];
            for (std::size_t i = 0; i < gb_.size(); ++i) gb_[i] += gb_t[t][i];
        }
    }

private:
    // cols[(c*9 + ky*3 + kx)][oy*out_w + ox] = in[c][oy+ky][ox+kx]
    void im2col(const T* in, T* cols) const {
        const int ow = out_.w;
        const int oh = out_.h;
        for (int c = 0; c < in_.c; ++c) {
            const T* plane = in + static_cast<std::size_t>(c) * in_.h * in_.w;
            for (int ky = 0; ky < K; ++ky) {
                for (int kx = 0; kx < K; ++kx) {
                    T* dst = cols + (static_cast<std::size_t>(c) * K * K + ky * K + kx) *
                                        (static_cast<std::size_t>(oh) * ow);
                    for (int oy = 0; oy < oh; ++oy)
                        std::memcpy(dst + static_cast<std::size_t>(oy) * ow,
                                    plane + static_cast<std::size_t>(oy + ky) * in_.w + kx,
                                    sizeof(T) * ow);
                }
            }
        }
    }

    void col2im(const T* dcols, T* din) const {
        std::memset(din, 0, sizeof(T) * in_.size());
        const int ow = out_.w;
        const int oh = out_.h;
        for (int c = 0; c < in_.c; ++c) {
            T* plane = din + static_cast<std::size_t>(c) * in_.h * in_.w;
            for (int ky = 0; ky < K; ++ky) {
                for (int kx = 0; kx < K; ++kx) {
                    const T* src = dcols + (static_cast<std::size_t>(c) * K * K + ky * K + kx) *
                                               (static_cast<std::size_t>(oh) * ow);
                    for (int oy = 0; oy < oh; ++oy) {
                        T* row = plane + static_cast<std::size_t>(oy + ky) * in_.w + kx;
                        const T* s = src + static_cast<std::size_t>(oy) * ow;
                        for (int ox = 0; ox < ow; ++ox) row[ox] += s[ox];
                    }
                }
            }
        }
    }

    static std::vector<T>& cols_ws(int slot) {
        thread_local std::vector<T> ws;
        (void)slot;
        return ws;
    }
    static std::vector<T>& dcols_ws(int slot) {
        thread_local std::vector<T> ws;
        (void)slot;
        return ws;
    }

    Shape3 in_, out_;
    int out_c_;
    int kdim_;
    std::vector<T> w_, b_, gw_, gb_;
    std::vector<T> cols_cache_;
    int cached_batch_ = 0;
};

// --- relu ------------------------------------------------------------------

template <typename T>
class Relu final : public Layer<T> {
public:
    explicit Relu(Shape3 s) : shape_(s) {}
    const char* kind() const override { return "relu"; }
    Shape3 in_shape() const override { return shape_; }
    Shape3 out_shape() const override { return shape_; }

    void forward(const T* in, T* out, int batch, bool, Rng&) override {
        const std::size_t n = static_cast<std::size_t>(batch) * shape_.size();
        parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t b0, std::int64_t b1, int) {
            kernels::relu_forward(in + b0, out + b0, static_cast<std::size_t>(b1 - b0));
        });
    }

    void backward(const T* in, const T* dout, T* din, int batch) override {
        if (!din) return;
        const std::size_t n = static_cast<std::size_t>(batch) * shape_.size();
        parallel_for(static_cast<std::int64_t>(n), [&](std::int64_t b0, std::int64_t b1, int) {
            kernels::relu_backward(in + b0, dout + b0, din + b0,
                                   static_cast<std::size_t>(b1 - b0));
        });
    }

private:
    Shape3 shape_;
};

// --- 2x2 max pooling, stride 2 (odd trailing row/col dropped) ---------------

template <typename T>
class MaxPool2 final : public Layer<T> {
public:
    explicit MaxPool2(Shape3 in) : in_(in) {
        if (in.h < 2 || in.w < 2) throw ShapeMismatch("maxpool: input smaller than 2x2");
        out_ = {in.c, in.h / 2, in.w / 2};
    }
    const char* kind() const override { return "maxpool"; }
    Shape3 in_shape() const override { return in_; }
    Shape3 out_shape() const override { return out_; }

    void forward(const T* in, T* out, int batch, bool, Rng&) override {
        const int in_size = in_.size();
        const int out_size = out_.size();
        argmax_.resize(static_cast<std::size_t>(batch) * out_size);
        parallel_for(batch, [&](std::int64_t b0, std::int64_t b1, int) {
            for (std::int64_t n = b0; n < b1; ++n) {
                const T* x = in + n * in_size;
                T* y = out + n * out_size;
                int* am = argmax_.data() + n * out_size;
                for (int c = 0; c < in_.c; ++c) {
                    const T* plane = x + static_cast<std::size_t>(c) * in_.h * in_.w;
                    for (int oy = 0; oy < out_.h; ++oy) {
                        for (int ox = 0; ox < out_.w; ++ox) {
                            int best = (2 * oy) * in_.w + 2 * ox;
                            T bv = plane[best];
                            const int cand[3] = {best + 1, best + in_.w, best + in_.w + 1};
                            for (int idx : cand) {
                                if (plane[idx] > bv) {
                                    bv = plane[idx];
                                    best = idx;
                                }
                            }
                            *y++ = bv;
                            *am++ = c * in_.h * in_.w + best;
                        }
                    }
                }
            }
        });
    }

    void backward(const T*, const T* dout, T* din, int batch) override {
        if (!din) return;
        const int in_size = in_.size();
        const int out_size = out_.size();
        parallel_for(batch, [&](std::int64_t b0, std::int64_t b1, int) {
            for (std::int64_t n = b0; n < b1; ++n) {
                T* dx = din + n * in_size;
                std::memset(dx, 0, sizeof(T) * in_size);
                const T* dy = dout + n * out_size;
                const int* am = argmax_.data() + n * out_size;
                for (int i = 0; i < out_size; ++i) dx[am[i]] += dy[i];
            }
        });
    }

private:
    Shape3 in_, out_;
    std::vector<int> argmax_;
};

// --- inverted dropout --------------------------------------------------------

template <typename T>
class Dropout final : public Layer<T> {
public:
    Dropout(Shape3 s, double rate) : shape_(s), rate_(rate) {
        if (!(rate >= 0.0) || rate >= 1.0)
            throw ShapeMismatch("dropout: rate must be in [0,1)");
    }
    const char* kind() const override { return "dropout"; }
    Shape3 in_shape() const override { return shape_; }
    Shape3 out_shape() const override { return shape_; }
    nlohmann::json descriptor() const override {
        return {{"kind", kind()}, {"rate", rate_}};
    }

    void forward(const T* in, T* out, int batch, bool train, Rng& rng) override {
        const std::size_t n = static_cast<std::size_t>(batch) * shape_.size();
        if (!train) {
            std::memcpy(out, in, n * sizeof(T));
            mask_.clear();
            return;
        }
        // surviving activations are scaled by 1/(1-rate) so eval needs none
        const T scale = static_cast<T>(1.0 / (1.0 - rate_));
        mask_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            mask_[i] = rng.uniform() < rate_ ? T(0) : scale;
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * mask_[i];
    }

    void backward(const T*, const T* dout, T* din, int batch) override {
        if (!din) return;
        const std::size_t n = static_cast<std::size_t>(batch) * shape_.size();
        if (mask_.empty()) {
            std::memcpy(din, dout, n * sizeof(T));
            return;
        }
        for (std::size_t i = 0; i < n; ++i) din[i] = dout[i] * mask_[i];
    }

    double rate() const { return rate_; }

private:
    Shape3 shape_;
    double rate_;
    std::vector<T> mask_;
};

// --- flatten (shape marker) --------------------------------------------------

template <typename T>
class Flatten final : public Layer<T> {
public:
    explicit Flatten(Shape3 in) : in_(in), out_{1, 1, in.size()} {}
    const char* kind() const override { return "flatten"; }
    Shape3 in_shape() const override { return in_; }
    Shape3 out_shape() const override { return out_; }

    void forward(const T* in, T* out, int batch, bool, Rng&) override {
        std::memcpy(out, in, static_cast<std::size_t>(batch) * in_.size() * sizeof(T));
    }
    void backward(const T*, const T* dout, T* din, int batch) override {
        if (din)
            std::memcpy(din, dout, static_cast<std::size_t>(batch) * in_.size() * sizeof(T));
    }

private:
    Shape3 in_, out_;
};

// --- dense -------------------------------------------------------------------

template <typename T>
class Dense final : public Layer<T> {
public:
    // `head` marks the final classifier layer: initialized near zero instead
    // of fan-in scaled (no relu follows, and fresh nets should emit
    // near-uniform class probabilities).
    Dense(Shape3 in, int units, bool head = false)
        : in_(in), out_{1, 1, units}, units_(units), head_(head) {
        w_.resize(static_cast<std::size_t>(units_) * in_.size());
        b_.resize(units_);
        gw_.resize(w_.size());
        gb_.resize(b_.size());
    }
    const char* kind() const override { return "dense"; }
    Shape3 in_shape() const override { return in_; }
    Shape3 out_shape() const override { return out_; }
    nlohmann::json descriptor() const override {
        return {{"kind", kind()}, {"units", units_}, {"head", head_}};
    }

    void init_params(Rng& rng) override {
        const double std = head_ ? 0.01 : std::sqrt(2.0 / in_.size());
        for (auto& v : w_) v = static_cast<T>(rng.gaussian(0.0, std));
        for (auto& v : b_) v = T(0);
    }

    void collect_params(std::vector<ParamView<T>>& out) override {
        out.push_back({w_.data(), gw_.data(), w_.size(), "dense.w"});
        out.push_back({b_.data(), gb_.data(), b_.size(), "dense.b"});
    }

    void forward(const T* in, T* out, int batch, bool, Rng&) override {
        const int I = in_.size();
        parallel_for(batch, [&](std::int64_t b0, std::int64_t b1, int) {
            const int rows = static_cast<int>(b1 - b0);
            kernels::gemm(rows, units_, I, in + b0 * I, I, false, w_.data(), I,
                          true, out + b0 * units_, units_, false);
            for (std::int64_t n = b0; n < b1; ++n) {
                T* row = out + n * units_;
                for (int u = 0; u < units_; ++u) row[u] += b_[u];
            }
        });
    }

    void backward(const T* in, const T* dout, T* din, int batch) override {
        const int I = in_.size();
        // dW = dY^T * X, split over output rows (disjoint), deterministic for
        // any thread count
        parallel_for(units_, [&](std::int64_t u0, std::int64_t u1, int) {
            kernels::gemm(static_cast<int>(u1 - u0), I, batch, dout + u0, units_,
                          true, in, I, false, gw_.data() + u0 * I, I, false);
            for (std::int64_t u = u0; u < u1; ++u) {
                T s = T(0);
                for (int n = 0; n < batch; ++n) s += dout[static_cast<std::size_t>(n) * units_ + u];
                gb_[u] = s;
            }
        });
        if (din) {
            parallel_for(batch, [&](std::int64_t b0, std::int64_t b1, int) {
                kernels::gemm(static_cast<int>(b1 - b0), I, units_, dout + b0 * units_,
                              units_, false, w_.data(), I, false, din + b0 * I, I, false);
            });
        }
    }

private:
    Shape3 in_, out_;
    int units_;
    bool head_;
    std::vector<T> w_, b_, gw_, gb_;
};

// --- softmax -----------------------------------------------------------------

template <typename T>
class Softmax final : public Layer<T> {
public:
    explicit Softmax(Shape3 in) : shape_(in) {}
    const char* kind() const override { return "softmax"; }
    Shape3 in_shape() const override { return shape_; }
    Shape3 out_shape() const override { return shape_; }

    void forward(const T* in, T* out, int batch, bool, Rng&) override {
        const int n = shape_.size();
        for (int b = 0; b < batch; ++b) {
            const T* x = in + static_cast<std::size_t>(b) * n;
            T* y = out + static_cast<std::size_t>(b) * n;
            T mx = x[0];
            for (int i = 1; i < n; ++i) mx = x[i] > mx ? x[i] : mx;
            T sum = T(0);
            for (int i = 0; i < n; ++i) {
                y[i] = std::exp(x[i] - mx);
                sum += y[i];
            }
            const T inv = T(1) / sum;
            for (int i = 0; i < n; ++i) y[i] *= inv;
        }
        last_out_.assign(out, out + static_cast<std::size_t>(batch) * n);
    }

    void backward(const T*, const T* dout, T* din, int batch) override {
        if (!din) return;
        const int n = shape_.size();
        for (int b = 0; b < batch; ++b) {
            const T* y = last_out_.data() + static_cast<std::size_t>(b) * n;
            const T* dy = dout + static_cast<std::size_t>(b) * n;
            T dot = T(0);
            for (int i = 0; i < n; ++i) dot += y[i] * dy[i];
            T* dx = din + static_cast<std::size_t>(b) * n;
            for (int i = 0; i < n; ++i) dx[i] = y[i] * (dy[i] - dot);
        }
    }

private:
    Shape3 shape_;
    std::vector<T> last_out_;
};

} // namespace fovea::nn
