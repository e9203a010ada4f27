#pragma once

#include <stdexcept>
#include <string>

namespace shapecx {

// Base for all toolkit errors. Subclasses exist so callers (and the CLI
// exit-code mapping) can distinguish bad input data from internal bugs.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer shape violations.
struct DimensionError : Error {
    using Error::Error;
};

// API misuse: missing gradients, non-scalar backward roots, slot mismatches.
struct ContractError : Error {
    using Error::Error;
};

// Malformed or truncated input files; message names the byte offset.
struct DecodeError : Error {
    using Error::Error;
};

// Valid file, unusable content: empty shapes, mismatched id sets,
// missing score components, degenerate generator parameters.
struct DataError : Error {
    using Error::Error;
};

} // namespace shapecx
