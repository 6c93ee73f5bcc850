#ifndef PRESTAMO_ERROR_HPP_
#define PRESTAMO_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace prestamo {

/// Invalid input data: malformed corpus lines, bad spans, bad feeds.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or unusable configuration (missing tables, bad values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure during optimization (NaN/Inf objective or gradient).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { kVersion, kTruncated, kDimension, kSyntax };

  ModelFormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace prestamo

#endif  // PRESTAMO_ERROR_HPP_
