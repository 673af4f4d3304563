#pragma once

#include <stdexcept>
#include <string>

namespace mutomo {

// bad input or configuration
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// well-formed input, but the numerics cannot deliver
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mutomo
