#pragma once

#include "fovea/errors.hpp"

#include <cstddef>
#include <numeric>
#include <vector>

namespace fovea::nn {

// Row-major dense value carrier. Layers validate shapes at the network
// boundary; a non-finite value anywhere downstream is treated as a numeric
// failure, not a recoverable state.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.resize(numel());
    }

    std::size_t numel() const {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        return shape.empty() ? 0 : n;
    }
};

// Per-sample activation geometry (channels, height, width).
struct Shape3 {
    int c = 1;
    int h = 1;
    int w = 1;
    int size() const { return c * h * w; }
    bool operator==(const Shape3&) const = default;
};

template <typename T>
struct ParamView {
    T* w = nullptr;
    T* g = nullptr;
    std::size_t n = 0;
    const char* name = "";
};

} // namespace fovea::nn
