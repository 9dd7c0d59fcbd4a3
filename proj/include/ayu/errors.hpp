#pragma once

#include <stdexcept>
#include <string>

namespace ayu {

// Bad user input: malformed files, out-of-range parameters, refused stability
// gates. The CLI maps this to exit code 1.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A mathematically guaranteed property failed at runtime. That means an
// implementation bug, not a modeling outcome, so callers should not catch and
// continue. The CLI maps this to exit code 2.
struct invariant_violation : std::runtime_error {
    explicit invariant_violation(const std::string& msg) : std::runtime_error(msg) {}
};

}
