#pragma once

#include <stdexcept>
#include <string>

namespace fractrace {

// Malformed parameters: bad ranges, non-positive tables, wrong dimension.
class InvalidSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The input is well formed but cannot be realised, e.g. a gauge whose
// inverse grows faster than 2^{jn}.
class InfeasibleInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A hypothesis required by a construction does not hold on the inputs
// (or cannot be certified at the given truncation).
class HypothesisRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The requested scale is finer than the approximation can resolve.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fractrace
