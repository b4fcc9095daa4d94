#pragma once

#include <stdexcept>
#include <string>

namespace fovea {

// Base class for all library errors. Subclasses exist so callers can
// distinguish data errors from numeric failures without string matching.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// mnist_io
struct BadMagic : Error { using Error::Error; };
struct Truncated : Error { using Error::Error; };
struct BadLabel : Error { using Error::Error; };
struct CountMismatch : Error { using Error::Error; };

// imageops / logpolar
struct BadFactor : Error { using Error::Error; };
struct CenterSingularity : Error { using Error::Error; };

// nn_core
struct ShapeMismatch : Error { using Error::Error; };
struct Divergence : Error { using Error::Error; };
struct ArchMismatch : Error { using Error::Error; };
struct CorruptFile : Error { using Error::Error; };

// experiments / cli
struct GridMismatch : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct BadFormat : Error { using Error::Error; };
struct ChecksumMismatch : Error { using Error::Error; };
struct NetworkError : Error { using Error::Error; };
struct NoResults : Error { using Error::Error; };

} // namespace fovea
