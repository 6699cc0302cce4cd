#pragma once

#include <stdexcept>
#include <string>

namespace rhc {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidRate : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Unstable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankDeficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelErrorTooLarge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RateProductNotContractive : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A simulated trajectory crossed the overflow guard.
struct DivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Configuration / schema problems. The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rhc
