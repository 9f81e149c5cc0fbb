#pragma once

#include <Eigen/Core>
#include <cstddef>

#include "fcir/errors.hpp"

namespace fcir {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform time grid t_j = j * step on [0, horizon] with `steps` intervals.
template <typename Scalar = double>
class Grid {
 public:
  Grid(Scalar horizon, Eigen::Index steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > Scalar(0))) throw DomainError("grid horizon must be positive");
    if (steps < 1) throw DomainError("grid needs at least one step");
    step_ = horizon_ / Scalar(steps_);
  }

  /// Grid with the given step; the step count is rounded to the nearest integer.
  static Grid with_step(Scalar horizon, Scalar step) {
    if (!(step > Scalar(0))) throw DomainError("grid step must be positive");
    using std::llround;
    return Grid(horizon, static_cast<Eigen::Index>(llround(horizon / step)));
  }

  Scalar horizon() const noexcept { return horizon_; }
  Eigen::Index steps() const noexcept { return steps_; }
  Eigen::Index nodes() const noexcept { return steps_ + 1; }
  Scalar step() const noexcept { return step_; }
  Scalar time(Eigen::Index j) const noexcept {
    return j == steps_ ? horizon_ : Scalar(j) * step_;
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.horizon_ == b.horizon_ && a.steps_ == b.steps_;
  }

 private:
  Scalar horizon_;
  Eigen::Index steps_;
  Scalar step_;
};

}  // namespace fcir
