#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gammalab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the operation's documented domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Input data (fields, samples, grids) is malformed or non-finite.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// The minimizer produced a non-finite energy. Carries the last finite iterate.
class Diverged : public Error {
public:
    Diverged(const std::string& what, std::vector<double> last_finite)
        : Error(what), last_finite_(std::move(last_finite)) {}

    const std::vector<double>& last_finite() const noexcept { return last_finite_; }

private:
    std::vector<double> last_finite_;
};

}  // namespace gammalab
