#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ninlab {

// Error taxonomy. The CLI maps these onto exit codes, so a given failure
// class must keep throwing the same type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad run configuration: inconsistent dimensions, invalid parameters.
struct ConfigError : Error {
    using Error::Error;
};

// Problems with input data: empty datasets, out-of-range labels, missing files.
struct DataError : Error {
    using Error::Error;
};

// Malformed file contents (IDX headers, CSV schemas). Carries a byte offset
// where parsing gave up, or -1 when not applicable.
struct FormatError : DataError {
    FormatError(const std::string& msg, long long offset = -1)
        : DataError(offset >= 0 ? msg + " (at byte " + std::to_string(offset) + ")" : msg),
          byte_offset(offset) {}
    long long byte_offset;
};

// Non-finite values where finite ones are required, integration blow-ups.
struct NumericError : Error {
    using Error::Error;
};

// Trajectory too short (or otherwise too thin) to classify or fit.
struct InsufficientDataError : Error {
    using Error::Error;
};

// A run is declared diverged once its loss is non-finite or exceeds this.
inline constexpr double kDivergenceThreshold = 1e12;

} // namespace ninlab
