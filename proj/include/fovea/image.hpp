#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace fovea {

// Dense grayscale raster, intensities in [0,1], row-major, origin top-left,
// x rightward, y downward.
struct Image {
    int w = 0;
    int h = 0;
    std::vector<float> data;

    Image() = default;
    Image(int width, int height, float fill = 0.0f)
        : w(width), h(height), data(static_cast<std::size_t>(width) * height, fill) {}

    float& at(int x, int y) {
        assert(x >= 0 && x < w && y >= 0 && y < h);
        return data[static_cast<std::size_t>(y) * w + x];
    }
    float at(int x, int y) const {
        assert(x >= 0 && x < w && y >= 0 && y < h);
        return data[static_cast<std::size_t>(y) * w + x];
    }
    std::size_t size() const { return data.size(); }

    bool operator==(const Image& o) const {
        return w == o.w && h == o.h && data == o.data;
    }
};

} // namespace fovea
