#pragma once

#include <stdexcept>
#include <string>

namespace pooledcs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument was outside the operation's domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A proposition's assumption (A1, A3, ...) does not hold and the
/// requested quantity is undefined.
class AssumptionError : public Error {
public:
    using Error::Error;
};

/// An iterative method ran out of iterations.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_iterate)
        : Error(what), last_iterate_(last_iterate) {}

    double last_iterate() const noexcept { return last_iterate_; }

private:
    double last_iterate_;
};

/// A metric is not defined for its inputs (e.g. RRMSE of a zero signal).
class MetricError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace pooledcs
