#include "fovea/pgm.hpp"

#include "fovea/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fovea {

namespace {

// next token, skipping whitespace and '#' comments
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c)) {
                tok.push_back(static_cast<char>(in.get()));
            }
            return tok;
        }
    }
    throw BadFormat("pgm: unexpected end of header");
}

int next_int(std::istream& in) {
    const std::string tok = next_token(in);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw BadFormat("pgm: expected integer, got '" + tok + "'");
    }
}

} // namespace

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("pgm: cannot open " + path);
    const std::string magic = next_token(in);
    if (magic != "P5" && magic != "P2")
        throw BadFormat("pgm: unsupported magic '" + magic + "' in " + path);
    const int w = next_int(in);
    const int h = next_int(in);
    const int maxval = next_int(in);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
        throw BadFormat("pgm: unsupported geometry or maxval in " + path);
    Image img(w, h);
    const float inv = 1.0f / static_cast<float>(maxval);
    if (magic == "P5") {
        in.get(); // single whitespace after maxval
        std::vector<unsigned char> buf(img.size());
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() != static_cast<std::streamsize>(buf.size()))
            throw Truncated("pgm: pixel payload shorter than promised in " + path);
        for (std::size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i] * inv;
    } else {
        for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = next_int(in) * inv;
    }
    return img;
}

void write_pgm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("pgm: cannot write " + path);
    out << "P5\n" << img.w << " " << img.h << "\n255\n";
    std::vector<unsigned char> buf(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        float v = img.data[i];
        v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        buf[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("pgm: short write to " + path);
}

} // namespace fovea
