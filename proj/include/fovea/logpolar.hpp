#pragma once

#include "fovea/image.hpp"
#include "fovea/imageops.hpp"

#include <utility>
#include <vector>

namespace fovea {

// Output geometry of the retina-style resampling. The source raster is
// resampled onto a grid uniform in angle (columns) and uniform in the log of
// the radial distance (rows, row 0 innermost), so a rotation of the source
// becomes a circular column shift and a rescaling becomes a row shift.
//
// A note on the radial coordinate: the log of the *squared* distance differs
// from the log of the distance only by a constant factor 2, which the fixed
// n_rho-row normalization absorbs completely; the implementation therefore
// works with log r and geometric radius spacing, which is the same grid.
struct LogPolarConfig {
    double xc = 13.5; // MNIST default: geometric center of a 28x28 raster
    double yc = 13.5;
    double r_min = 0.5; // half-pixel innermost ring; avoids log(0)
    double r_max = 14.0; // inscribed-circle coverage of a 28-px side
    int n_theta = 28; // columns; angle step 2*pi/n_theta
    int n_rho = 28; // rows; geometric radius spacing
    double theta_zero = 0.0; // angle mapped to column 0 (+x direction)

    void validate() const; // throws Error on violated invariants
};

// Precomputed Cartesian sample coordinates, row-major [n_rho][n_theta]:
//   r(i)     = r_min * (r_max/r_min)^(i/(n_rho-1))
//   theta(j) = theta_zero + 2*pi*j/n_theta
//   (sx, sy) = (xc + r cos(theta), yc + r sin(theta))
struct SampleGrid {
    int n_theta = 0;
    int n_rho = 0;
    std::vector<float> sx;
    std::vector<float> sy;
};

// Full-quadrant log-polar coordinates of a point: theta in [0, 2*pi) measured
// from +x toward +y (y down), rho = log of the Euclidean distance. Throws
// CenterSingularity when p equals the center.
std::pair<double, double> rho_theta(double x, double y, double xc, double yc);

SampleGrid make_grid(const LogPolarConfig& cfg);

// Resample img onto the grid; pixel (i,j) = sample of img at (sx(i,j),
// sy(i,j)). Theta varies along columns, rho along rows.
Image to_logpolar(const Image& img, const SampleGrid& grid,
                  InterpMode mode = InterpMode::bilinear);

// Approximate inverse for visualization: each Cartesian output pixel is
// mapped to (rho, theta) and sampled from lp bilinearly, wrapping theta
// circularly; radii outside [r_min, r_max] give 0.
Image from_logpolar(const Image& lp, const LogPolarConfig& cfg, int out_w,
                    int out_h);

// (n_theta * n_rho) / (src_w * src_h)
double compression_factor(const LogPolarConfig& cfg, int src_w, int src_h);

} // namespace fovea
