#pragma once

#include <stdexcept>
#include <string>

namespace pne {

/// Malformed input document. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line)
        : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A physical or structural invariant was violated. `field` names the offending quantity.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Estimator inputs imply a negative probability (beyond tolerance).
class UnphysicalError : public std::runtime_error {
public:
    UnphysicalError(std::string quantity, const std::string& what)
        : std::runtime_error(quantity + ": " + what), quantity_(std::move(quantity)) {}
    const std::string& quantity() const noexcept { return quantity_; }

private:
    std::string quantity_;
};

/// Discretisation too coarse, sampler starved, or similar numerical breakdown.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pne
