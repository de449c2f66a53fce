#pragma once

#include <stdexcept>
#include <string>

namespace aquacast {

/// Bad or inconsistent input data (malformed CSV, gaps, negative demand,
/// insufficient records). CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure during computation (training divergence, non-finite
/// results). CLI maps this to exit code 4.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aquacast
