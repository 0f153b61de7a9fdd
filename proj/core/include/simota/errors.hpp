#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace simota {

/// Malformed or inconsistent input. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// NaN/overflow produced during computation. Maps to CLI exit code 3.
///
/// `index` carries the offending anchor or step when one is known.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), index_(index) {}

  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  std::optional<std::size_t> index_;
};

/// A one-to-one matching was requested with more rows than columns.
class InfeasibleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace simota
