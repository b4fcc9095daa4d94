#include "fovea/nn/network.hpp"

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; big-endian hosts need swaps");

namespace fovea::nn {

void save_weights(Network<float>& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("weights: cannot write " + path);
    out.write(kWeightMagic, sizeof(kWeightMagic));
    const std::string desc = net.descriptor().dump();
    const std::uint32_t len = static_cast<std::uint32_t>(desc.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(desc.data(), static_cast<std::streamsize>(desc.size()));
    for (const auto& p : net.params())
        out.write(reinterpret_cast<const char*>(p.w),
                  static_cast<std::streamsize>(p.n * sizeof(float)));
    if (!out) throw IoError("weights: short write to " + path);
}

Network<float> load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("weights: cannot open " + path);
    char magic[sizeof(kWeightMagic)];
    in.read(magic, sizeof(magic));
    if (in.gcount() != sizeof(magic) ||
        std::memcmp(magic, kWeightMagic, sizeof(magic) - 1) != 0)
        throw CorruptFile("weights: bad magic in " + path);
    if (magic[7] != kWeightMagic[7])
        throw CorruptFile("weights: unsupported format version in " + path);
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (in.gcount() != sizeof(len) || len == 0 || len > (1u << 20))
        throw CorruptFile("weights: bad descriptor length in " + path);
    std::string desc(len, '\0');
    in.read(desc.data(), len);
    if (in.gcount() != static_cast<std::streamsize>(len))
        throw CorruptFile("weights: truncated descriptor in " + path);
    nlohmann::json d;
    try {
        d = nlohmann::json::parse(desc);
    } catch (const nlohmann::json::exception&) {
        throw CorruptFile("weights: descriptor is not valid JSON in " + path);
    }
    Network<float> net = network_from_descriptor<float>(d, /*seed=*/0);
    for (const auto& p : net.params()) {
        in.read(reinterpret_cast<char*>(p.w),
                static_cast<std::streamsize>(p.n * sizeof(float)));
        if (in.gcount() != static_cast<std::streamsize>(p.n * sizeof(float)))
            throw CorruptFile("weights: truncated parameter data in " + path);
    }
    // trailing bytes mean the file does not describe this architecture
    char extra;
    in.read(&extra, 1);
    if (in.gcount() != 0)
        throw CorruptFile("weights: trailing bytes in " + path);
    return net;
}

} // namespace fovea::nn
