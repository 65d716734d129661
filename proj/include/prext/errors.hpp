// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace prext {

// Thrown when a request is well-formed but exceeds a configured
// desk-scale cap (state dimension, seed enumeration, sweep size).
class resource_limit_error : public std::runtime_error {
public:
  explicit resource_limit_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Thrown when a numerical routine cannot meet its tolerance
// (e.g. a purification hits an eigenvalue below the repair clamp).
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace prext
