#pragma once

#include <stdexcept>
#include <string>

namespace abl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or missing configuration value. `key()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& reason)
      : Error("config error: " + key + ": " + reason), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// The similarity system has no admissible root (flow too stable for the wall model).
class NoStableSolution : public Error {
 public:
  using Error::Error;
};

/// Requested time step exceeds the advective or diffusive stability limit.
class CflViolation : public Error {
 public:
  CflViolation(const std::string& what, double dt, double limit)
      : Error(what), dt_(dt), limit_(limit) {}
  double dt() const noexcept { return dt_; }
  double limit() const noexcept { return limit_; }

 private:
  double dt_;
  double limit_;
};

/// Poisson right-hand side violates the Neumann compatibility condition.
class IncompatibleRhs : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or version-mismatched checkpoint file.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace abl
