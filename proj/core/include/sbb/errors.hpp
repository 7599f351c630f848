#pragma once

#include <stdexcept>
#include <string>

namespace sbb {

/// Invalid configuration (bad thresholds, missing files, inconsistent options).
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or unusable input data (trajectories, corpora, manifests).
/// The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sbb
