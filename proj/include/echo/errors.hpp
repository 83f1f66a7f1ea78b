// errors.hpp - exception types shared across the library
#pragma once

#include <stdexcept>
#include <string>

namespace echo {

/// Input failed a structural or physical invariant.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unit lookup or dimensional mismatch.
class UnitError : public std::invalid_argument {
public:
    explicit UnitError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Filesystem / parse-level failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace echo
