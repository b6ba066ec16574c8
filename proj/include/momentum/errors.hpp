#pragma once

#include <stdexcept>
#include <string>

namespace momentum {

// Input data is malformed, missing, or otherwise unusable. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric computation cannot proceed: non-finite input, singular system,
// constant column where variation is required. CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace momentum
