#pragma once

#include "fovea/image.hpp"

namespace fovea {

enum class InterpMode { nearest, bilinear };

// Point sample with bilinear blending of the four neighboring pixel centers.
// Integer coordinates address pixel centers; neighbors outside the raster
// contribute 0, so anything fully outside [-0.5,w-0.5]x[-0.5,h-0.5] reads 0.
float bilinear_sample(const Image& img, float sx, float sy);

// Nearest pixel (ties round half-up); out of range reads 0.
float nearest_sample(const Image& img, float sx, float sy);

// Rigid rotation about (xc, yc) by `degrees`, inverse-mapped (pull) sampling,
// background fill 0. Positive angles rotate counter-clockwise in conventional
// math axes, which appears clockwise on screen with the y-down raster; this
// one convention is used everywhere, including the log-polar column order.
Image rotate(const Image& img, float degrees, float xc, float yc,
             InterpMode mode = InterpMode::bilinear);

// Shrink content by `factor` in (0,1] about (xc, yc); same dimensions,
// background fill 0. Throws BadFactor outside (0,1].
Image scale(const Image& img, float factor, float xc, float yc,
            InterpMode mode = InterpMode::bilinear);

// Column j of the output is column (j-k mod w) of the input.
Image circular_shift_columns(const Image& img, int k);

// Non-circular vertical shift by k rows (down for k>0); vacated rows take
// `fill`.
Image shift_rows(const Image& img, int k, float fill = 0.0f);

} // namespace fovea
