#pragma once

#include <stdexcept>
#include <string>

namespace l2e {

/// Bad dimensions, out-of-range options, or malformed penalty parameters.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A valid request that this library does not implement (for example an
/// isotonic indicator with a non-diagonal design).
class UnsupportedConfiguration : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A non-finite intermediate showed up where the math says it cannot.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace l2e
