#pragma once

#include <stdexcept>
#include <string>

namespace relent {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Raised when every outcome of a measurement has (numerically) zero probability.
class DegenerateError : public Error {
public:
    using Error::Error;
};

// Raised by the enumerating ensemble engine when the member count passes its cap.
class BlowUpError : public Error {
public:
    using Error::Error;
};

// Diffusive step whose unnormalized output vanished.
class StepRejectedError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace relent
