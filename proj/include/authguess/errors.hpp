#pragma once

#include <stdexcept>
#include <string>

namespace authguess {

// Invalid problem data: bad pmf, malformed distortion matrix, bad parameters.
class InvalidInputError : public std::runtime_error {
public:
    explicit InvalidInputError(const std::string& what) : std::runtime_error(what) {}
};

// Instance exceeds a configured enumeration limit.
class SizeLimitError : public std::runtime_error {
public:
    explicit SizeLimitError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver exhausted its iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace authguess
