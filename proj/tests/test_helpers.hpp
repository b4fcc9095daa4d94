#pragma once

#include "fovea/idx.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

// Canonical MNIST is looked up via FOVEA_DATA_DIR; golden-file tests degrade
// to a doctest MESSAGE when the files are absent (the acceptance suite, by
// contrast, requires them).
inline std::optional<std::string> mnist_dir() {
    const char* env = std::getenv("FOVEA_DATA_DIR");
    if (!env) return std::nullopt;
    const auto paths = fovea::mnist_paths(env);
    if (!std::filesystem::exists(paths.train_images)) return std::nullopt;
    return std::string(env);
}

inline std::filesystem::path test_tmp_dir() {
    auto p = std::filesystem::temp_directory_path() / "fovea_tests";
    std::filesystem::create_directories(p);
    return p;
}
