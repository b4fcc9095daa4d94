#pragma once

#include "fovea/image.hpp"

#include <string>

namespace fovea {

// 8-bit binary PGM (P5). read_pgm also accepts ASCII P2 and rescales
// maxval < 255; write_pgm emits a fixed header so identical images produce
// byte-identical files.
Image read_pgm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);

} // namespace fovea
