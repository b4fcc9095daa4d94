#include "doctest.h"

#include "fovea/errors.hpp"
#include "fovea/imageops.hpp"
#include "fovea/rng.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <numeric>

using namespace fovea;

namespace {

Image random_image(Rng& rng, int w, int h) {
    Image img(w, h);
    for (auto& v : img.data) v = static_cast<float>(rng.uniform());
    return img;
}

double sum(const Image& img) {
    return std::accumulate(img.data.begin(), img.data.end(), 0.0);
}

double mean_abs_diff(const Image& a, const Image& b) {
    REQUIRE(a.w == b.w);
    REQUIRE(a.h == b.h);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
    return s / static_cast<double>(a.size());
}

// digit-like blob: a bright ring plus a stroke, clipped to [0,1]
Image synthetic_digit(Rng& rng) {
    Image img(28, 28);
    const double cx = 13.5 + rng.uniform() * 2 - 1;
    const double cy = 13.5 + rng.uniform() * 2 - 1;
    const double r0 = 5.0 + rng.uniform() * 3;
    for (int y = 0; y < 28; ++y)
        for (int x = 0; x < 28; ++x) {
            const double r = std::hypot(x - cx, y - cy);
            double v = std::exp(-(r - r0) * (r - r0) / 2.0);
            if (std::abs(x - cx) < 1.5 && y > cy) v = std::max(v, 0.9);
            img.at(x, y) = static_cast<float>(std::min(1.0, v));
        }
    return img;
}

} // namespace

TEST_CASE("bilinear_sample: frozen example values") {
    // 2x2 image [[0,1],[0,1]] sampled at (0.5,0.5):
    // all four weights are 0.25, so the blend is 0*.25 + 1*.25 + 0*.25 + 1*.25 = 0.5
    Image img(2, 2);
    img.at(0, 0) = 0.0f;
    img.at(1, 0) = 1.0f;
    img.at(0, 1) = 0.0f;
    img.at(1, 1) = 1.0f;
    CHECK(bilinear_sample(img, 0.5f, 0.5f) == doctest::Approx(0.5).epsilon(1e-7));

    Rng rng(5);
    const Image r = random_image(rng, 7, 6);
    CHECK(bilinear_sample(r, 3.0f, 4.0f) == r.at(3, 4)); // integer pixel identity
    CHECK(bilinear_sample(r, -10.0f, -10.0f) == 0.0f);   // fully out of bounds
    CHECK(bilinear_sample(r, 100.0f, 2.0f) == 0.0f);
}

TEST_CASE("rotate: identity, permutation and inverse-map examples") {
    Rng rng(9);
    const Image img = random_image(rng, 28, 28);
    CHECK(rotate(img, 0.0f, 13.5f, 13.5f) == img);
    CHECK(rotate(img, 360.0f, 13.5f, 13.5f) == img);
    CHECK(rotate(img, -720.0f, 13.5f, 13.5f) == img);

    // 90-degree rotations about the geometric center permute pixels; nearest
    // mode composes back to the identity
    const Image r90 = rotate(img, 90.0f, 13.5f, 13.5f, InterpMode::nearest);
    const Image back = rotate(r90, 270.0f, 13.5f, 13.5f, InterpMode::nearest);
    CHECK(mean_abs_diff(back, img) <= 1e-6);

    // bright pixel at (20,14), center (14,14): +90 degrees sends it to (14,20)
    // (y-down raster; the motion looks clockwise on screen)
    Image dot(28, 28);
    dot.at(20, 14) = 1.0f;
    const Image rot = rotate(dot, 90.0f, 14.0f, 14.0f);
    CHECK(rot.at(14, 20) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(sum(rot) == doctest::Approx(1.0).epsilon(1e-4));

    CHECK_THROWS_AS(rotate(img, std::nanf(""), 13.5f, 13.5f), Error);
}

TEST_CASE("scale: identity, uniform interior, inverse-map example, errors") {
    Rng rng(10);
    const Image img = random_image(rng, 28, 28);
    CHECK(scale(img, 1.0f, 13.5f, 13.5f, InterpMode::nearest) == img);
    CHECK(scale(img, 1.0f, 13.5f, 13.5f) == img);

    Image uniform(28, 28, 0.5f);
    const Image half = scale(uniform, 0.5f, 13.5f, 13.5f);
    for (int y = 0; y < 28; ++y)
        for (int x = 0; x < 28; ++x)
            if (std::hypot(x - 13.5, y - 13.5) <= 6.0)
                CHECK(half.at(x, y) == doctest::Approx(0.5).epsilon(1e-6));

    Image dot(28, 28);
    dot.at(26, 14) = 1.0f;
    const Image s = scale(dot, 0.5f, 14.0f, 14.0f);
    CHECK(s.at(20, 14) == doctest::Approx(1.0).epsilon(1e-5));

    CHECK_THROWS_AS(scale(img, 0.0f, 13.5f, 13.5f), BadFactor);
    CHECK_THROWS_AS(scale(img, -0.5f, 13.5f, 13.5f), BadFactor);
    CHECK_THROWS_AS(scale(img, 1.5f, 13.5f, 13.5f), BadFactor);
}

TEST_CASE("circular_shift_columns: identity, period, swap, additive composition") {
    Rng rng(12);
    const Image img = random_image(rng, 2, 3);
    CHECK(circular_shift_columns(img, 0) == img);
    CHECK(circular_shift_columns(img, img.w) == img);

    const Image swapped = circular_shift_columns(img, 1);
    for (int y = 0; y < img.h; ++y) {
        CHECK(swapped.at(0, y) == img.at(1, y));
        CHECK(swapped.at(1, y) == img.at(0, y));
    }

    const Image wide = random_image(rng, 11, 4);
    for (int a : {-3, 2, 7})
        for (int b : {1, 5, 13})
            CHECK(circular_shift_columns(circular_shift_columns(wide, a), b) ==
                  circular_shift_columns(wide, a + b));
}

TEST_CASE("shift_rows: identity, full clear, frozen 3-row example") {
    Rng rng(14);
    const Image img = random_image(rng, 4, 3);
    CHECK(shift_rows(img, 0, 0.0f) == img);

    const Image cleared = shift_rows(img, img.h, 0.25f);
    for (float v : cleared.data) CHECK(v == 0.25f);

    const Image down = shift_rows(img, 1, 0.0f);
    for (int x = 0; x < img.w; ++x) {
        CHECK(down.at(x, 0) == 0.0f);
        CHECK(down.at(x, 1) == img.at(x, 0));
        CHECK(down.at(x, 2) == img.at(x, 1));
    }
    const Image up = shift_rows(img, -1, 0.0f);
    for (int x = 0; x < img.w; ++x) {
        CHECK(up.at(x, 0) == img.at(x, 1));
        CHECK(up.at(x, 2) == 0.0f);
    }
}

TEST_CASE("property: rotation by 360k multiples is exact, other warps do not invent energy") {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const Image img = synthetic_digit(rng);
        CHECK(rotate(img, 360.0f * (1 + trial % 3), 13.5f, 13.5f) == img);

        const float deg = static_cast<float>(rng.uniform() * 360.0);
        const Image r = rotate(img, deg, 13.5f, 13.5f);
        CHECK(sum(r) <= sum(img) + 1e-3 * img.w * img.h);

        const float factor = static_cast<float>(0.4 + 0.6 * rng.uniform());
        const Image s = scale(img, factor, 13.5f, 13.5f);
        CHECK(sum(s) <= sum(img) + 1e-3 * img.w * img.h);
    }
}

TEST_CASE("property: energy bound holds on real MNIST digits") {
    const auto dir = mnist_dir();
    if (!dir) return;
    const auto paths = mnist_paths(*dir);
    const Dataset test = load_dataset(paths.test_images, paths.test_labels, Split::test);
    Rng rng(16);
    for (int i = 0; i < 50; ++i) {
        const Image& img = test.images[static_cast<std::size_t>(rng.below(test.size()))];
        const float deg = static_cast<float>(rng.uniform() * 360.0);
        CHECK(sum(rotate(img, deg, 13.5f, 13.5f)) <= sum(img) + 1e-3 * img.w * img.h);
        const float factor = static_cast<float>(0.4 + 0.6 * rng.uniform());
        CHECK(sum(scale(img, factor, 13.5f, 13.5f)) <= sum(img) + 1e-3 * img.w * img.h);
    }
}
