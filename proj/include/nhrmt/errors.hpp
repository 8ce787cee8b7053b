#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nhrmt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Arguments outside the mathematical domain of a function.
struct DomainError : Error {
    using Error::Error;
};

// A series, quadrature or iteration did not reach its tolerance.
struct ConvergenceError : Error {
    using Error::Error;
};

// Invalid ensemble, experiment or plot configuration.
struct ConfigError : Error {
    using Error::Error;
};

struct PairingError : Error {
    using Error::Error;
};

struct InsufficientDataError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct CorruptArchiveError : IoError {
    CorruptArchiveError(const std::string& what, std::uint64_t offset)
        : IoError(what + " at byte offset " + std::to_string(offset)), offset(offset) {}
    std::uint64_t offset;
};

// Raised by the harness when a single sample fails; carries the sample index.
struct SampleError : Error {
    SampleError(const std::string& what, std::uint64_t index)
        : Error("sample " + std::to_string(index) + ": " + what), sample_index(index) {}
    std::uint64_t sample_index;
};

}  // namespace nhrmt
