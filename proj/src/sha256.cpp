#include "fovea/sha256.hpp"

#include "fovea/errors.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <memory>

namespace fovea {

namespace {

std::string to_hex(const unsigned char* d, unsigned n) {
    static const char* hex = "0123456789abcdef";
    std::string out(n * 2, '0');
    for (unsigned i = 0; i < n; ++i) {
        out[2 * i] = hex[d[i] >> 4];
        out[2 * i + 1] = hex[d[i] & 0xf];
    }
    return out;
}

} // namespace

std::string sha256_hex(const std::uint8_t* data, std::size_t n) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data, n) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw Error("sha256: digest computation failed");
    return to_hex(digest, len);
}

std::string sha256_hex(const std::vector<std::uint8_t>& data) {
    return sha256_hex(data.data(), data.size());
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("sha256: cannot open " + path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest init failed");
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        if (in.gcount() > 0 &&
            EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount())) != 1)
            throw Error("sha256: digest update failed");
    }
    if (EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw Error("sha256: digest final failed");
    return to_hex(digest, len);
}

} // namespace fovea
