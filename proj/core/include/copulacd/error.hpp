#pragma once

#include <stdexcept>
#include <string>

namespace copulacd {

/// Broad failure category. The CLI maps these onto process exit codes.
enum class ErrorKind {
  usage,      ///< bad arguments or configuration
  data,       ///< unreadable, malformed or inconsistent input data
  numerical,  ///< non-finite values / divergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Raised by training when the total loss becomes non-finite.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, long epoch) : NumericalError(what), epoch_(epoch) {}
  long epoch() const noexcept { return epoch_; }

 private:
  long epoch_;
};

}  // namespace copulacd
