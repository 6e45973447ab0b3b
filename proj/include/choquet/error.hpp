#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace choquet {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression source. `offset` is a byte offset into the input
/// (equal to the input length when the input ended early).
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected, std::string found)
      : Error("parse error at offset " + std::to_string(offset) + ": expected " + expected +
              ", found " + found),
        offset_(offset),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

/// Evaluation left the real domain (sqrt of a negative, ln of a non-positive,
/// division by zero, overflow, ...).
class DomainError : public Error {
 public:
  DomainError(std::string what, std::string subexpression, double point)
      : Error(what + " in '" + subexpression + "' at t=" + format_point(point)),
        subexpression_(std::move(subexpression)),
        point_(point) {}

  const std::string& subexpression() const noexcept { return subexpression_; }
  double point() const noexcept { return point_; }

 private:
  static std::string format_point(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }

  std::string subexpression_;
  double point_;
};

class NonDifferentiable : public Error {
 public:
  using Error::Error;
};

class InvalidDistortion : public Error {
 public:
  using Error::Error;
};

class InvalidInterval : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Input function is not nonnegative and nondecreasing on the working range.
class NotInFPlus : public Error {
 public:
  using Error::Error;
};

class DivergentIntegral : public Error {
 public:
  using Error::Error;
};

class NonPositiveS : public Error {
 public:
  using Error::Error;
};

class FNotZeroAtA : public Error {
 public:
  using Error::Error;
};

class GVanishes : public Error {
 public:
  using Error::Error;
};

/// Any other numerical breakdown (vanishing denominators, non-finite sums).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace choquet
