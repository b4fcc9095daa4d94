#pragma once

#include "fovea/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fovea {

// MNIST IDX container, bit-exact: bytes 0-3 magic (big-endian; 0x00000803
// images, 0x00000801 labels), one 32-bit big-endian size per dimension, then
// the unsigned-byte payload in row-major order.
constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

enum class Split { train, test };

struct Dataset {
    std::vector<Image> images;
    std::vector<std::uint8_t> labels;
    Split split = Split::train;

    std::size_t size() const { return images.size(); }
};

// Byte b maps to intensity b/255. Throws BadMagic / Truncated.
std::vector<Image> parse_idx_images(const std::vector<std::uint8_t>& bytes);

// Labels must lie in 0..9. Throws BadMagic / Truncated / BadLabel.
std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes);

// Exact inverses of the parsers (intensities are quantized back with
// round-to-nearest; parsed data round-trips byte-identically).
std::vector<std::uint8_t> serialize_idx_images(const std::vector<Image>& images);
std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels);

// Reads a file, transparently gunzipping when it starts with the gzip magic.
std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path);

// Loads and pairs an image/label file; order is the file order.
// Throws CountMismatch when the two counts differ.
Dataset load_dataset(const std::string& image_path, const std::string& label_path,
                     Split split);

// Resolves the four canonical file paths inside data_dir, preferring the
// uncompressed name and falling back to "<name>.gz".
struct MnistPaths {
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
};
MnistPaths mnist_paths(const std::string& data_dir);

} // namespace fovea
