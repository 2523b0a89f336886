#pragma once

#include <stdexcept>
#include <string>

namespace rgmkl {

/// Malformed or unusable input data (traces, feature files, models).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration values or keys.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rgmkl
