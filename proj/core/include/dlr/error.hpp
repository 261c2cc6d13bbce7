#pragma once

#include <stdexcept>
#include <string>

namespace dlr {

enum class ErrorCode {
  invalid_argument,
  numeric_overflow,
  singular_matrix,
  config,
  data,
  format,
};

/// Base of every exception thrown by the library. The code selects the CLI
/// exit status (see tools/dlr.cpp).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::invalid_argument, what) {}
};

class NumericOverflow : public Error {
 public:
  explicit NumericOverflow(const std::string& what)
      : Error(ErrorCode::numeric_overflow, what) {}
};

class SingularMatrix : public Error {
 public:
  explicit SingularMatrix(const std::string& what)
      : Error(ErrorCode::singular_matrix, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCode::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCode::data, what) {}
};

/// Corrupted or incompatible model artifact.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what)
      : Error(ErrorCode::format, what) {}
};

[[nodiscard]] const char* to_string(ErrorCode code) noexcept;

}  // namespace dlr
