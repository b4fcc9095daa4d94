#pragma once

#include "json.hpp"

#include <string>

namespace fovea {

inline constexpr const char* kCodeVersion = "fovea 0.1.0";

// Every CLI run writes a manifest before any result file: seed, config
// snapshot, dataset checksums, code version, and the geometric conventions
// the numbers depend on (rotation sign, log-polar axis layout).
class RunManifest {
public:
    RunManifest(const std::string& command, std::uint64_t seed, int threads);

    nlohmann::json& json() { return j_; }

    void set_config(const nlohmann::json& cfg) { j_["config"] = cfg; }
    void add_dataset_file(const std::string& path); // records path + sha256
    void set_timing_seconds(double s) { j_["timing_seconds"] = s; }

    // write() is called once before results; finalize() rewrites the file
    // with timing after the run completes.
    void write(const std::string& path) const;

private:
    nlohmann::json j_;
};

} // namespace fovea
