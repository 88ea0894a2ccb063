#pragma once

#include <stdexcept>
#include <string>

namespace edr {

/// Malformed or inconsistent input data (bad CSV, unknown label, missing column).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace edr
