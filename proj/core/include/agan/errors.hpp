#pragma once

#include <stdexcept>
#include <string>

namespace agan {

// Error taxonomy. The CLI maps ConfigError to exit code 1 and every other
// Error subclass to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Tensor/sequence dimension mismatch between operands.
struct ShapeError : Error {
    using Error::Error;
};

// Bad input data (too-short clips, non-finite gradients, empty sets).
struct DataError : Error {
    using Error::Error;
};

// Unparseable or unsupported file content (WAV, mel containers).
struct FormatError : Error {
    using Error::Error;
};

struct CheckpointError : Error {
    using Error::Error;
};

// Argument outside a function's mathematical domain.
struct DomainError : Error {
    using Error::Error;
};

}  // namespace agan
