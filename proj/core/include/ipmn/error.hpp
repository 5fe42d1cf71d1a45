#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ipmn {

/// Broad failure class; the CLI maps each category to a distinct exit code.
enum class ErrorCategory {
  io = 2,                // file missing, unreadable or unwritable
  format = 3,            // malformed file content (NIfTI header, CSV, JSON)
  invalid_argument = 4,  // precondition violated by the caller
  geometry = 5,          // mismatched or unsupported image geometry
  numeric = 6,           // degenerate data, rank deficiency
  data = 7,              // inconsistent study contents (ids, labels)
  leakage = 8,           // blind-test case found in a fitted artifact
};

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorCategory::io, m) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& m) : Error(ErrorCategory::format, m) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& m)
      : Error(ErrorCategory::invalid_argument, m) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& m) : Error(ErrorCategory::geometry, m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error(ErrorCategory::numeric, m) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& m) : Error(ErrorCategory::data, m) {}
};

class LeakageError : public Error {
 public:
  explicit LeakageError(const std::string& m) : Error(ErrorCategory::leakage, m) {}
};

}  // namespace ipmn
