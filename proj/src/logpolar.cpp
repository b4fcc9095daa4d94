#include "fovea/logpolar.hpp"

#include "fovea/errors.hpp"
#include "fovea/kernels/kernels.hpp"

#include <cmath>

namespace fovea {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void LogPolarConfig::validate() const {
    if (!(r_min > 0.0) || !(r_max > r_min))
        throw Error("logpolar: need 0 < r_min < r_max");
    if (n_theta < 2 || n_rho < 2)
        throw Error("logpolar: need n_theta >= 2 and n_rho >= 2");
}

std::pair<double, double> rho_theta(double x, double y, double xc, double yc) {
    const double dx = x - xc;
    const double dy = y - yc;
    if (dx == 0.0 && dy == 0.0)
        throw CenterSingularity("rho_theta: point equals the center");
    double theta = std::atan2(dy, dx);
    if (theta < 0.0) theta += kTwoPi;
    const double rho = 0.5 * std::log(dx * dx + dy * dy);
    return {rho, theta};
}

SampleGrid make_grid(const LogPolarConfig& cfg) {
    cfg.validate();
    SampleGrid g;
    g.n_theta = cfg.n_theta;
    g.n_rho = cfg.n_rho;
    g.sx.resize(static_cast<std::size_t>(cfg.n_rho) * cfg.n_theta);
    g.sy.resize(g.sx.size());
    const double log_ratio = std::log(cfg.r_max / cfg.r_min);
    std::size_t idx = 0;
    for (int i = 0; i < cfg.n_rho; ++i) {
        const double r =
            cfg.r_min * std::exp(log_ratio * static_cast<double>(i) / (cfg.n_rho - 1));
        for (int j = 0; j < cfg.n_theta; ++j, ++idx) {
            const double theta = cfg.theta_zero + kTwoPi * j / cfg.n_theta;
            g.sx[idx] = static_cast<float>(cfg.xc + r * std::cos(theta));
            g.sy[idx] = static_cast<float>(cfg.yc + r * std::sin(theta));
        }
    }
    return g;
}

Image to_logpolar(const Image& img, const SampleGrid& grid, InterpMode mode) {
    Image out(grid.n_theta, grid.n_rho);
    if (mode == InterpMode::bilinear) {
        kernels::bilinear_gather(img.data.data(), img.w, img.h, grid.sx.data(),
                                 grid.sy.data(), out.data.data(), out.size());
    } else {
        for (std::size_t i = 0; i < out.size(); ++i)
            out.data[i] = nearest_sample(img, grid.sx[i], grid.sy[i]);
    }
    return out;
}

Image from_logpolar(const Image& lp, const LogPolarConfig& cfg, int out_w,
                    int out_h) {
    cfg.validate();
    if (lp.w != cfg.n_theta || lp.h != cfg.n_rho)
        throw ShapeMismatch("from_logpolar: lp dimensions do not match config");
    // wrap theta by appending column 0 on the right, then sample with the
    // usual zero-fill gather
    Image wrapped(lp.w + 1, lp.h);
    for (int y = 0; y < lp.h; ++y) {
        for (int x = 0; x < lp.w; ++x) wrapped.at(x, y) = lp.at(x, y);
        wrapped.at(lp.w, y) = lp.at(0, y);
    }
    Image out(out_w, out_h);
    const double log_ratio = std::log(cfg.r_max / cfg.r_min);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const double dx = x - cfg.xc;
            const double dy = y - cfg.yc;
            const double r = std::hypot(dx, dy);
            if (r < cfg.r_min || r > cfg.r_max) continue;
            double theta = std::atan2(dy, dx) - cfg.theta_zero;
            theta -= kTwoPi * std::floor(theta / kTwoPi); // into [0, 2*pi)
            const double row = (cfg.n_rho - 1) * std::log(r / cfg.r_min) / log_ratio;
            const double col = cfg.n_theta * theta / kTwoPi;
            out.at(x, y) = bilinear_sample(wrapped, static_cast<float>(col),
                                           static_cast<float>(row));
        }
    }
    return out;
}

double compression_factor(const LogPolarConfig& cfg, int src_w, int src_h) {
    if (src_w <= 0 || src_h <= 0)
        throw Error("compression_factor: source dims must be positive");
    return static_cast<double>(cfg.n_theta) * cfg.n_rho /
           (static_cast<double>(src_w) * src_h);
}

} // namespace fovea
