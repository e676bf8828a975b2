#pragma once

#include <stdexcept>
#include <string>

namespace ballet {

/// Error taxonomy shared by the library and the command-line tool. The
/// numeric value of each kind is the process exit code the CLI reports.
enum class ErrorKind : int {
  kConfig = 2,
  kIo = 3,
  kNumeric = 4,
  kInfeasible = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Invalid parameters or inconsistent options.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

/// Inputs whose sizes do not line up (e.g. an ensemble with the wrong n).
class AlignmentError : public ConfigError {
 public:
  explicit AlignmentError(const std::string& what) : ConfigError(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

/// Non-finite or out-of-range numeric input.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::kNumeric, what) {}
};

/// A request that cannot be carried out at the given size.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::kInfeasible, what) {}
};

}  // namespace ballet
