#include "fovea/idx.hpp"

#include "fovea/errors.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace fovea {

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | p[3];
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
    z_stream zs;
    std::memset(&zs, 0, sizeof(zs));
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw Error("gzip: inflateInit failed");
    std::vector<std::uint8_t> out;
    out.resize(in.size() * 4 + 1024);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int ret = Z_OK;
    std::size_t written = 0;
    while (ret != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        zs.next_out = out.data() + written;
        zs.avail_out = static_cast<uInt>(out.size() - written);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Truncated("gzip: corrupt or truncated stream");
        }
        written = out.size() - zs.avail_out;
    }
    inflateEnd(&zs);
    out.resize(written);
    return out;
}

} // namespace

std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b)
        return gunzip(bytes);
    return bytes;
}

std::vector<Image> parse_idx_images(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16) throw Truncated("idx: image header needs 16 bytes");
    const std::uint32_t magic = read_be32(bytes.data());
    if (magic != kIdxImageMagic)
        throw BadMagic("idx: expected image magic 0x00000803");
    const std::uint32_t count = read_be32(bytes.data() + 4);
    const std::uint32_t rows = read_be32(bytes.data() + 8);
    const std::uint32_t cols = read_be32(bytes.data() + 12);
    const std::size_t need =
        16 + static_cast<std::size_t>(count) * rows * cols;
    if (bytes.size() < need)
        throw Truncated("idx: image payload shorter than header promises");
    std::vector<Image> images;
    images.reserve(count);
    const std::uint8_t* p = bytes.data() + 16;
    constexpr float kInv255 = 1.0f / 255.0f;
    for (std::uint32_t n = 0; n < count; ++n) {
        Image img(static_cast<int>(cols), static_cast<int>(rows));
        for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = p[i] * kInv255;
        p += img.size();
        images.push_back(std::move(img));
    }
    return images;
}

std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8) throw Truncated("idx: label header needs 8 bytes");
    const std::uint32_t magic = read_be32(bytes.data());
    if (magic != kIdxLabelMagic)
        throw BadMagic("idx: expected label magic 0x00000801");
    const std::uint32_t count = read_be32(bytes.data() + 4);
    if (bytes.size() < 8 + static_cast<std::size_t>(count))
        throw Truncated("idx: label payload shorter than header promises");
    std::vector<std::uint8_t> labels(bytes.begin() + 8, bytes.begin() + 8 + count);
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] > 9)
            throw BadLabel("idx: label byte " + std::to_string(labels[i]) +
                           " at index " + std::to_string(i));
    return labels;
}

std::vector<std::uint8_t> serialize_idx_images(const std::vector<Image>& images) {
    std::vector<std::uint8_t> out;
    const int rows = images.empty() ? 0 : images.front().h;
    const int cols = images.empty() ? 0 : images.front().w;
    out.reserve(16 + images.size() * static_cast<std::size_t>(rows) * cols);
    write_be32(out, kIdxImageMagic);
    write_be32(out, static_cast<std::uint32_t>(images.size()));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    for (const Image& img : images) {
        if (img.h != rows || img.w != cols)
            throw ShapeMismatch("idx: all images in a file must share dimensions");
        for (float v : img.data) {
            v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
            out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0f)));
        }
    }
    return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    write_be32(out, kIdxLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    for (std::uint8_t l : labels) {
        if (l > 9) throw BadLabel("idx: label out of range");
        out.push_back(l);
    }
    return out;
}

Dataset load_dataset(const std::string& image_path, const std::string& label_path,
                     Split split) {
    Dataset ds;
    ds.images = parse_idx_images(read_file_maybe_gzip(image_path));
    ds.labels = parse_idx_labels(read_file_maybe_gzip(label_path));
    ds.split = split;
    if (ds.images.size() != ds.labels.size())
        throw CountMismatch("idx: " + std::to_string(ds.images.size()) +
                            " images vs " + std::to_string(ds.labels.size()) +
                            " labels");
    return ds;
}

MnistPaths mnist_paths(const std::string& data_dir) {
    auto pick = [&data_dir](const char* name) {
        namespace fs = std::filesystem;
        const fs::path plain = fs::path(data_dir) / name;
        if (fs::exists(plain)) return plain.string();
        return (fs::path(data_dir) / (std::string(name) + ".gz")).string();
    };
    return MnistPaths{pick("train-images-idx3-ubyte"), pick("train-labels-idx1-ubyte"),
                      pick("t10k-images-idx3-ubyte"), pick("t10k-labels-idx1-ubyte")};
}

} // namespace fovea
