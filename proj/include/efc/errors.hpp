#pragma once

#include <stdexcept>
#include <string>

namespace efc {

/// File or filesystem problem (missing path, unreadable file).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (bad dates, gaps, unit ambiguity).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical degeneracy (non-SPD covariance, undefined tangency, zero variance).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad run configuration (unknown key, unparsable value).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace efc
