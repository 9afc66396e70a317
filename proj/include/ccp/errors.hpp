#pragma once

#include <stdexcept>
#include <string>

namespace ccp {

// Bad input: malformed distributions, schema violations, out-of-range labels.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical or runtime failure (divergent optimization, non-finite loss).
// The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ccp
