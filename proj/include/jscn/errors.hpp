#pragma once

#include <stdexcept>
#include <string>

namespace jscn {

/// Malformed input: unreadable files, bad config, shape mismatches,
/// violated preconditions. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: NaN/Inf in losses or gradients, eigensolver
/// non-convergence. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace jscn
