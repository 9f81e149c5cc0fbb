#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fcir {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input too small or too large for an operation.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Broken internal invariant; not retryable.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Explicit Euler step would move the path by more than the epsilon scale.
class StabilityError : public std::runtime_error {
 public:
  StabilityError(const std::string& what, double ratio)
      : std::runtime_error(what), ratio_(ratio) {}
  double ratio() const noexcept { return ratio_; }

 private:
  double ratio_;
};

/// Ladder levels out of order beyond round-off.
class LadderError : public std::runtime_error {
 public:
  LadderError(const std::string& what, std::size_t level, std::size_t node)
      : std::runtime_error(what), level_(level), node_(node) {}
  std::size_t level() const noexcept { return level_; }
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t level_;
  std::size_t node_;
};

/// The two finest ladder levels are further apart than the requested tolerance.
class NotConverged : public std::runtime_error {
 public:
  explicit NotConverged(double achieved_tol)
      : std::runtime_error("ladder not converged: sup gap " +
                           std::to_string(achieved_tol)),
        achieved_tol_(achieved_tol) {}
  double achieved_tol() const noexcept { return achieved_tol_; }

 private:
  double achieved_tol_;
};

/// Malformed experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fcir
