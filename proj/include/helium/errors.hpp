#pragma once

#include <stdexcept>
#include <string>

namespace helium {

/// Input lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Requested tolerance could not be met within the evaluation budget.
class AccuracyError : public std::runtime_error {
public:
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

/// Input fails a regularity hypothesis (divergent singular integral,
/// non-isolated zeros, identically vanishing signal).
class RegularityError : public std::runtime_error {
public:
    explicit RegularityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace helium
