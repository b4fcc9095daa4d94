#include "fovea/imageops.hpp"

#include "fovea/errors.hpp"
#include "fovea/kernels/kernels.hpp"

#include <cmath>
#include <vector>

namespace fovea {

float bilinear_sample(const Image& img, float sx, float sy) {
    float out;
    kernels::scalar::bilinear_gather(img.data.data(), img.w, img.h, &sx, &sy,
                                     &out, 1);
    return out;
}

float nearest_sample(const Image& img, float sx, float sy) {
    const int ix = static_cast<int>(std::floor(sx + 0.5f));
    const int iy = static_cast<int>(std::floor(sy + 0.5f));
    if (ix < 0 || ix >= img.w || iy < 0 || iy >= img.h) return 0.0f;
    return img.at(ix, iy);
}

namespace {

Image warp(const Image& img, const std::vector<float>& sx,
           const std::vector<float>& sy, InterpMode mode) {
    Image out(img.w, img.h);
    if (mode == InterpMode::bilinear) {
        kernels::bilinear_gather(img.data.data(), img.w, img.h, sx.data(),
                                 sy.data(), out.data.data(), out.size());
    } else {
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data[i] = nearest_sample(img, sx[i], sy[i]);
    }
    return out;
}

} // namespace

Image rotate(const Image& img, float degrees, float xc, float yc,
             InterpMode mode) {
    if (!std::isfinite(degrees)) throw Error("rotate: angle must be finite");
    const float rem = std::fmod(degrees, 360.0f);
    if (rem == 0.0f) return img;
    // inverse map: source = center + R(-angle) * (dst - center)
    const double a = -static_cast<double>(degrees) * (3.14159265358979323846 / 180.0);
    const float c = static_cast<float>(std::cos(a));
    const float s = static_cast<float>(std::sin(a));
    std::vector<float> sx(img.size()), sy(img.size());
    std::size_t i = 0;
    for (int y = 0; y < img.h; ++y) {
        const float dy = static_cast<float>(y) - yc;
        for (int x = 0; x < img.w; ++x, ++i) {
            const float dx = static_cast<float>(x) - xc;
            sx[i] = xc + c * dx - s * dy;
            sy[i] = yc + s * dx + c * dy;
        }
    }
    return warp(img, sx, sy, mode);
}

Image scale(const Image& img, float factor, float xc, float yc,
            InterpMode mode) {
    if (!(factor > 0.0f) || factor > 1.0f)
        throw BadFactor("scale: factor must be in (0,1]");
    if (factor == 1.0f) return img;
    const float inv = 1.0f / factor;
    std::vector<float> sx(img.size()), sy(img.size());
    std::size_t i = 0;
    for (int y = 0; y < img.h; ++y) {
        const float dy = (static_cast<float>(y) - yc) * inv;
        for (int x = 0; x < img.w; ++x, ++i) {
            sx[i] = xc + (static_cast<float>(x) - xc) * inv;
            sy[i] = yc + dy;
        }
    }
    return warp(img, sx, sy, mode);
}

Image circular_shift_columns(const Image& img, int k) {
    Image out(img.w, img.h);
    if (img.w == 0) return out;
    k = ((k % img.w) + img.w) % img.w;
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            out.at(x, y) = img.at((x - k + img.w) % img.w, y);
    return out;
}

Image shift_rows(const Image& img, int k, float fill) {
    Image out(img.w, img.h, fill);
    for (int y = 0; y < img.h; ++y) {
        const int src = y - k;
        if (src < 0 || src >= img.h) continue;
        for (int x = 0; x < img.w; ++x) out.at(x, y) = img.at(x, src);
    }
    return out;
}

} // namespace fovea
