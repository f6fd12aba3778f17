#pragma once

#include <stdexcept>
#include <string>

namespace arisim {

/// Bad configuration (file contents, key values, inconsistent settings).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Geometry that cannot produce a valid channel (zero-length segments, ...).
struct invalid_geometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numeric failure at run time (singular systems, non-finite values, ...).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace arisim
