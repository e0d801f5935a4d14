#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parityforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable name used in CLI error records.
  virtual const char* kind() const noexcept { return "Error"; }
};

/// A constructed state leaves more population in the top levels of the
/// truncated space than the configured tolerance allows.
class TailOverflow : public Error {
 public:
  TailOverflow(double tail_mass, double tolerance);
  const char* kind() const noexcept override { return "TailOverflow"; }
  double tail_mass() const noexcept { return tail_mass_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  double tail_mass_;
  double tolerance_;
};

/// Post-selected branch with vanishing weight.
class ZeroProbability : public Error {
 public:
  explicit ZeroProbability(double probability,
                           std::optional<std::size_t> step = std::nullopt);
  const char* kind() const noexcept override { return "ZeroProbability"; }
  double probability() const noexcept { return probability_; }
  std::optional<std::size_t> step() const noexcept { return step_; }
  ZeroProbability at_step(std::size_t step) const;

 private:
  double probability_;
  std::optional<std::size_t> step_;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs);
  const char* kind() const noexcept override { return "DimensionMismatch"; }
};

class NotHermitian : public Error {
 public:
  explicit NotHermitian(double residual);
  const char* kind() const noexcept override { return "NotHermitian"; }
};

/// Invalid protocol parameters (e.g. an even length for the symmetric
/// ansatz). Raised by the sequence generators and runners.
class InvalidSequence : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "InvalidSequence"; }
};

/// One or more configuration violations. All are collected before throwing.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const char* kind() const noexcept override { return "ConfigError"; }
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace parityforge
