#pragma once

#include <stdexcept>
#include <string>

namespace splyne {

/// Malformed input: bad mesh geometry, bad knot vectors, bad scenario config.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: singular mass matrix, eigensolver residual out of spec.
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace splyne
