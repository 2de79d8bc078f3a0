#pragma once

#include <stdexcept>
#include <string>

namespace mteval {

// Bad input data or arguments. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem / stream failures. CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mteval
