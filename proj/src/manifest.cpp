#include "fovea/manifest.hpp"

#include "fovea/errors.hpp"
#include "fovea/sha256.hpp"

#include <chrono>
#include <fstream>

namespace fovea {

RunManifest::RunManifest(const std::string& command, std::uint64_t seed, int threads) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char ts[32];
    std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    j_ = {{"schema", 1},
          {"code_version", kCodeVersion},
          {"command", command},
          {"seed", seed},
          {"threads", threads},
          {"created_utc", ts},
          {"datasets", nlohmann::json::array()},
          {"conventions",
           {{"raster", "origin top-left, x right, y down"},
            {"rotation", "positive angles counter-clockwise in math axes "
                         "(clockwise on screen); rotation by +k*360/n_theta "
                         "column-shifts the log-polar image by +k"},
            {"scale_shift", "shrinking by s moves log-polar content up by "
                            "~(n_rho-1)*ln(1/s)/ln(r_max/r_min) rows"},
            {"logpolar_axes", "theta along columns, rho along rows, row 0 innermost"},
            {"theta_zero", "column 0 points along +x"}}}};
}

void RunManifest::add_dataset_file(const std::string& path) {
    j_["datasets"].push_back({{"path", path}, {"sha256", sha256_file(path)}});
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("manifest: cannot write " + path);
    out << j_.dump(2) << '\n';
    if (!out) throw IoError("manifest: short write to " + path);
}

} // namespace fovea
