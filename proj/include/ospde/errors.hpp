#pragma once

#include <stdexcept>
#include <string>

namespace ospde {

/// Argument outside the mathematical domain of an operation (t <= 0, n < 1, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inputs with inconsistent shapes or lengths.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid problem or run configuration (schema violations, HO violations, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An empirical Lipschitz ratio exceeded the declared constant.
class HypothesisViolation : public std::runtime_error {
public:
    HypothesisViolation(std::string coefficient, const std::string& what)
        : std::runtime_error(what), coefficient_(std::move(coefficient)) {}
    const std::string& coefficient() const { return coefficient_; }

private:
    std::string coefficient_;
};

/// Linear solve failure, non-finite values, non-convergent iteration.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ospde
