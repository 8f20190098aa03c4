#pragma once

#include <stdexcept>
#include <string>

namespace decontam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of the operands do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf entries, empty inputs and similar malformed data.
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// A positive-definite system turned out to be numerically singular.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of the operation (e.g. theta > pi).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Scenario or experiment description that cannot be run.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input that is well-formed but carries no usable signal (all-zero data, empty rank).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

} // namespace decontam
