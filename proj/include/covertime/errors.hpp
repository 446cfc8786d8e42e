#pragma once

#include <stdexcept>
#include <string>

namespace covertime {

/// Raised when an argument lies outside an operation's domain.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Raised when a numerical routine cannot meet its own accuracy contract
/// (series cap reached, unexpected negative density, non-finite increment).
class AccuracyError : public std::runtime_error {
public:
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace covertime
