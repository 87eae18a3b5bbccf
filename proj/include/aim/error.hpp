#pragma once

#include <stdexcept>
#include <string>

namespace aim {

// Bad input or violated invariant. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Valid input, but the requested computation cannot proceed (e.g. an
// optimizer that cannot produce a feasible individual). Exit code 3.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace aim
