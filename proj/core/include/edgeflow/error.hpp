#pragma once

#include <stdexcept>
#include <string>

namespace edgeflow {

/// Raised for every recoverable failure in the library: malformed files,
/// dimension mismatches, invalid parameters.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edgeflow
