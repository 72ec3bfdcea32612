#pragma once

#include <stdexcept>
#include <string>

namespace uplift {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid run configuration (bad config file, out-of-range settings).
struct ConfigError : Error {
    using Error::Error;
};

/// Invalid argument to a library operation.
struct ArgumentError : Error {
    using Error::Error;
};

/// CSV header does not match the declared schema.
struct SchemaError : Error {
    using Error::Error;
};

/// A cell could not be parsed; message carries the row number.
struct ParseError : Error {
    using Error::Error;
};

/// Data violates a domain contract (unknown treatment label, misaligned ids).
struct DataError : Error {
    using Error::Error;
};

/// Model fitting cannot proceed (empty arm, too few rows).
struct FitError : Error {
    using Error::Error;
};

/// Instance too large to solve exactly, or constraints cannot be met.
struct CapacityError : Error {
    using Error::Error;
};

}  // namespace uplift
