#pragma once

#include <stdexcept>
#include <string>

namespace grwalk {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or operands from different groups.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A query falls outside a computed range (cache radius, truncation level,
/// search bracket).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A size cap was hit. `progress` records how far the computation got
/// (ball radius reached, last completed step, ...).
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, long long progress)
      : Error(what), progress_(progress) {}
  long long progress() const noexcept { return progress_; }

 private:
  long long progress_;
};

/// An iterative method stopped at its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double residual)
      : Error(what), best_(best_estimate), residual_(residual) {}
  double best_estimate() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  double best_;
  double residual_;
};

/// The hypotheses of a theorem do not hold for the supplied inputs.
class InapplicableError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration. Carries the offending line (0 if unknown) and key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line, std::string key)
      : Error(what), line_(line), key_(std::move(key)) {}
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace grwalk
