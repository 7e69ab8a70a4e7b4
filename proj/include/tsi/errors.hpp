#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsi {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input bytes (bad JSON, bad UTF-8). Carries a byte offset when known.
struct ParseError : Error {
    explicit ParseError(const std::string& msg, std::size_t offset = 0)
        : Error(msg), offset(offset) {}
    std::size_t offset = 0;
};

// Structurally valid input that violates the schema (wrong type, out-of-range field).
struct ValidationError : Error {
    using Error::Error;
};

// Degenerate or unusable geometry (zero-area polygon, exterior centroid, over-shrunk).
struct GeometryError : Error {
    using Error::Error;
};

// Bad configuration or arguments.
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
    using Error::Error;
};

// Inputs that do not belong together (mismatched image_id sets).
struct DataMismatchError : Error {
    using Error::Error;
};

} // namespace tsi
