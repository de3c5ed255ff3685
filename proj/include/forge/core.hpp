#pragma once

#include <stdexcept>
#include <string>

namespace forge {

// Failure of a mathematical precondition or an unrecoverable numerical
// breakdown (continuation stall, non-discrete input, odd crossing count).
// The CLI maps this to exit code 2.
struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed user input (bad word syntax, inconsistent flags). Exit code 64.
struct usage_error : std::runtime_error {
    explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace forge
