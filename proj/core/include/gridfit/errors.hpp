#pragma once

#include <stdexcept>
#include <string>

namespace gridfit {

/// Malformed or inconsistent run configuration / input file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CSV (or other text input) could not be parsed; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Regression problem is rank deficient (e.g. constant excitation).
class UnidentifiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not enough data points for the requested model order.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every candidate model was rejected (unidentifiable or divergent).
class NoModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A recursion or integration produced non-finite values.
class NumericBlowupError : public std::runtime_error {
public:
    NumericBlowupError(const std::string& what, double pole_radius)
        : std::runtime_error(what), pole_radius_(pole_radius) {}
    /// Largest pole magnitude of the offending system (NaN when not applicable).
    double pole_radius() const noexcept { return pole_radius_; }

private:
    double pole_radius_;
};

/// Iterative solver failed to converge; carries the worst residual seen.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double worst_mismatch)
        : std::runtime_error(what), worst_mismatch_(worst_mismatch) {}
    double worst_mismatch() const noexcept { return worst_mismatch_; }

private:
    double worst_mismatch_;
};

}  // namespace gridfit
