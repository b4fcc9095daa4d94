#pragma once

// Central finite-difference gradient oracle, shared by the unit tests and
// the acceptance suite. The objective is sum(c .* layer(x)) with fixed random
// c. Finite differences run on the double instantiation of the layer (no
// backward code involved); the float layer's analytic gradients must match
// within 1e-3 relative error and the double layer's within 1e-6, with
// relative error |a-b| / max(|a|, |b|, 0.01).

#include "fovea/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

namespace gradcheck {

using fovea::Rng;
using namespace fovea::nn;

struct LayerPair {
    std::unique_ptr<Layer<float>> f32;
    std::unique_ptr<Layer<double>> f64;
    std::vector<double> x;
};

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 0.01});
}

inline double objective(Layer<double>& layer, const std::vector<double>& x,
                        const std::vector<double>& c, std::uint64_t mask_seed) {
    std::vector<double> y(c.size());
    Rng rng(mask_seed);
    layer.forward(x.data(), y.data(), 1, /*train=*/true, rng);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += c[i] * y[i];
    return s;
}

struct CheckStats {
    double max_rel_f32 = 0.0;
    double max_rel_f64 = 0.0;
    int coords = 0;
};

inline void check_layer_pair(LayerPair& lp, Rng& rng, std::uint64_t mask_seed,
                             CheckStats& stats) {
    const std::size_t in_n = lp.x.size();
    const std::size_t out_n = static_cast<std::size_t>(lp.f64->out_shape().size());
    std::vector<double> c(out_n);
    for (auto& v : c) v = rng.uniform() * 2.0 - 1.0;
    std::vector<float> cf(c.begin(), c.end());

    std::vector<float> xf(lp.x.begin(), lp.x.end());
    std::vector<float> yf(out_n), dinf(in_n);
    std::vector<double> yd(out_n), dind(in_n);
    {
        Rng r32(mask_seed);
        lp.f32->forward(xf.data(), yf.data(), 1, true, r32);
        lp.f32->backward(xf.data(), cf.data(), dinf.data(), 1);
    }
    {
        Rng r64(mask_seed);
        lp.f64->forward(lp.x.data(), yd.data(), 1, true, r64);
        lp.f64->backward(lp.x.data(), c.data(), dind.data(), 1);
    }
    std::vector<ParamView<float>> p32;
    std::vector<ParamView<double>> p64;
    lp.f32->collect_params(p32);
    lp.f64->collect_params(p64);

    const double h = 1e-5;
    auto fd_at = [&](double* slot) {
        const double keep = *slot;
        *slot = keep + h;
        const double fp = objective(*lp.f64, lp.x, c, mask_seed);
        *slot = keep - h;
        const double fm = objective(*lp.f64, lp.x, c, mask_seed);
        *slot = keep;
        return (fp - fm) / (2.0 * h);
    };

    for (int s = 0; s < 4; ++s) {
        const std::size_t i = static_cast<std::size_t>(rng.below(in_n));
        const double fd = fd_at(&lp.x[i]);
        stats.max_rel_f32 = std::max(stats.max_rel_f32, rel_err(dinf[i], fd));
        stats.max_rel_f64 = std::max(stats.max_rel_f64, rel_err(dind[i], fd));
        ++stats.coords;
    }
    for (std::size_t t = 0; t < p64.size(); ++t) {
        for (int s = 0; s < 4; ++s) {
            const std::size_t i = static_cast<std::size_t>(rng.below(p64[t].n));
            const double fd = fd_at(&p64[t].w[i]);
            stats.max_rel_f32 = std::max(stats.max_rel_f32, rel_err(p32[t].g[i], fd));
            stats.max_rel_f64 = std::max(stats.max_rel_f64, rel_err(p64[t].g[i], fd));
            ++stats.coords;
        }
    }
}

inline std::vector<double> random_input(Rng& rng, std::size_t n, bool away_from_zero) {
    std::vector<double> x(n);
    for (auto& v : x) {
        v = rng.uniform() * 2.0 - 1.0;
        if (away_from_zero && std::abs(v) < 0.05) v = v < 0 ? v - 0.05 : v + 0.05;
    }
    return x;
}

// every 2x2 window gets a unique argmax with a margin far above the FD step
inline std::vector<double> pool_safe_input(Rng& rng, int c, int h, int w) {
    std::vector<double> x(static_cast<std::size_t>(c) * h * w);
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y + 1 < h; y += 2)
            for (int xx = 0; xx + 1 < w; xx += 2) {
                double base = rng.uniform();
                int order[4] = {0, 1, 2, 3};
                for (int i = 3; i > 0; --i)
                    std::swap(order[i], order[static_cast<int>(rng.below(i + 1))]);
                const std::size_t idx[4] = {
                    static_cast<std::size_t>((ch * h + y) * w + xx),
                    static_cast<std::size_t>((ch * h + y) * w + xx + 1),
                    static_cast<std::size_t>((ch * h + y + 1) * w + xx),
                    static_cast<std::size_t>((ch * h + y + 1) * w + xx + 1)};
                for (int i = 0; i < 4; ++i)
                    x[idx[i]] = base + 0.3 * order[i] + 0.02 * rng.uniform();
            }
    return x;
}

template <template <typename> class L, typename... Args>
LayerPair make_layer_pair(Rng& rng, Shape3 in, bool away_from_zero, Args... args) {
    LayerPair lp;
    lp.f32 = std::make_unique<L<float>>(in, args...);
    lp.f64 = std::make_unique<L<double>>(in, args...);
    lp.x = random_input(rng, static_cast<std::size_t>(in.size()), away_from_zero);
    Rng prng(rng.next_u64());
    lp.f64->init_params(prng);
    std::vector<ParamView<float>> p32;
    std::vector<ParamView<double>> p64;
    lp.f32->collect_params(p32);
    lp.f64->collect_params(p64);
    for (std::size_t t = 0; t < p64.size(); ++t)
        for (std::size_t i = 0; i < p64[t].n; ++i)
            p32[t].w[i] = static_cast<float>(p64[t].w[i]);
    return lp;
}

// runs `trials` seeded trials for every layer kind; returns per-kind stats
struct KindResult {
    const char* kind;
    CheckStats stats;
};

inline std::vector<KindResult> check_all_layer_kinds(int trials) {
    std::vector<KindResult> results;
    auto run_kind = [&](const char* kind, auto&& factory) {
        Rng rng(std::hash<std::string>{}(kind) | 1);
        CheckStats stats;
        for (int t = 0; t < trials; ++t) {
            LayerPair lp = factory(rng);
            check_layer_pair(lp, rng, 1000 + t, stats);
        }
        results.push_back({kind, stats});
    };
    run_kind("conv2d", [](Rng& rng) {
        return make_layer_pair<Conv2d>(rng, Shape3{2, 6, 6}, false, 3);
    });
    run_kind("relu", [](Rng& rng) {
        return make_layer_pair<Relu>(rng, Shape3{1, 4, 5}, true);
    });
    run_kind("maxpool", [](Rng& rng) {
        LayerPair lp = make_layer_pair<MaxPool2>(rng, Shape3{2, 4, 4}, false);
        lp.x = pool_safe_input(rng, 2, 4, 4);
        return lp;
    });
    run_kind("dropout", [](Rng& rng) {
        return make_layer_pair<Dropout>(rng, Shape3{1, 3, 7}, false, 0.4);
    });
    run_kind("flatten", [](Rng& rng) {
        return make_layer_pair<Flatten>(rng, Shape3{2, 3, 4}, false);
    });
    run_kind("dense", [](Rng& rng) {
        return make_layer_pair<Dense>(rng, Shape3{1, 1, 11}, false, 7, false);
    });
    run_kind("softmax", [](Rng& rng) {
        return make_layer_pair<Softmax>(rng, Shape3{1, 1, 10}, false);
    });
    return results;
}

} // namespace gradcheck
