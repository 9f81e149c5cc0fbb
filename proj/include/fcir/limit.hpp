#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fcir/euler.hpp"

namespace fcir {

inline constexpr double kOrderingSlack = 1e-12;

struct OrderingViolation {
  std::size_t level;  // the coarser of the two compared levels
  Eigen::Index node;
  double coarse_eps;
  double fine_eps;
  double coarse_value;
  double fine_value;
};

/// Euler paths for a decreasing epsilon schedule, all driven by one fBm path.
template <typename Scalar = double>
struct EpsLadder {
  std::vector<EpsPath<Scalar>> levels;
  std::vector<OrderingViolation> violations;
  std::size_t ties = 0;  // nodes j >= 1 where consecutive levels coincide within slack
  // True when the finest level satisfies monotone_step_ratio < 1, so the
  // discrete recursion preserves the ordering exactly.
  bool ordering_guaranteed = false;
};

template <typename Scalar = double>
struct LimitPath {
  Grid<Scalar> grid;
  CirParams<Scalar> params;
  std::uint64_t driving_seed;
  Scalar finest_eps;
  Scalar achieved_tol;
  Vector<Scalar> values;
};

/// Pure check of the pointwise ordering lower < upper at nodes j >= 1.
template <typename Scalar>
void check_ordering(const EpsPath<Scalar>& coarse, const EpsPath<Scalar>& fine, std::size_t level,
                    EpsLadder<Scalar>& out) {
  using std::abs;
  const auto& lo = coarse.values;
  const auto& hi = fine.values;
  for (Eigen::Index j = 1; j < lo.size(); ++j) {
    const Scalar slack = Scalar(kOrderingSlack) * std::max({abs(lo[j]), abs(hi[j]), Scalar(1)});
    if (lo[j] > hi[j] + slack) {
      out.violations.push_back({level, j, double(coarse.eps.value()), double(fine.eps.value()),
                                double(lo[j]), double(hi[j])});
    } else if (!(lo[j] < hi[j])) {
      ++out.ties;
    }
  }
}

/// Simulate every level of `schedule` (strictly decreasing) on the same fBm
/// path and verify the comparison ordering. When the step size guarantees
/// the discrete ordering, a violation is a defect and throws LadderError
/// (unless `throw_on_violation` is false). Otherwise violations are only
/// recorded for the caller to report.
template <typename Scalar>
EpsLadder<Scalar> build_ladder(const CirParams<Scalar>& p, const FbmPath<Scalar>& fbm,
                               const std::vector<Scalar>& schedule, DriftKind kind,
                               bool throw_on_violation = true) {
  if (schedule.empty()) throw DomainError("build_ladder: empty epsilon schedule");
  for (std::size_t m = 1; m < schedule.size(); ++m)
    if (!(schedule[m] < schedule[m - 1]))
      throw DomainError("build_ladder: epsilon schedule must be strictly decreasing");

  EpsLadder<Scalar> ladder;
  ladder.levels.reserve(schedule.size());
  for (Scalar e : schedule) ladder.levels.push_back(simulate_eps_path(p, Epsilon<Scalar>(e), fbm, kind));
  for (std::size_t m = 0; m + 1 < ladder.levels.size(); ++m)
    check_ordering(ladder.levels[m], ladder.levels[m + 1], m, ladder);

  ladder.ordering_guaranteed =
      monotone_step_ratio(p, ladder.levels.back().eps, fbm.grid.step()) < Scalar(1);
  if (throw_on_violation && ladder.ordering_guaranteed && !ladder.violations.empty()) {
    const auto& v = ladder.violations.front();
    throw LadderError("ladder ordering violated at node " + std::to_string(v.node) + " between eps " +
                          std::to_string(v.coarse_eps) + " and " + std::to_string(v.fine_eps) + " (" +
                          std::to_string(ladder.violations.size()) + " violations)",
                      v.level, static_cast<std::size_t>(v.node));
  }
  return ladder;
}

template <typename Scalar>
Scalar sup_distance(const Vector<Scalar>& u, const Vector<Scalar>& v) {
  return (u - v).cwiseAbs().maxCoeff();
}

enum class LimitEstimate {
  finest,      // the finest level itself
  richardson,  // 2 Y_finest - Y_next, cancelling the first-order epsilon bias
};

/// Limit of the ladder, certified by the sup distance between its two finest
/// levels. With `richardson` the values stay above the finest level (the
/// ladder is increasing) and the noise term keeps unit weight, so the
/// extrapolated path is driven by the same c2 sigma B^H.
template <typename Scalar>
LimitPath<Scalar> extract_limit(const EpsLadder<Scalar>& ladder, Scalar tol,
                                LimitEstimate estimate = LimitEstimate::finest) {
  if (ladder.levels.size() < 2) throw SizeError("extract_limit: ladder needs at least two levels");
  const auto& finest = ladder.levels.back();
  const auto& next = ladder.levels[ladder.levels.size() - 2];
  const Scalar gap = sup_distance(finest.values, next.values);
  if (gap > tol) throw NotConverged(double(gap));
  Vector<Scalar> values = estimate == LimitEstimate::finest
                              ? finest.values
                              : Vector<Scalar>(Scalar(2) * finest.values - next.values);
  return {finest.grid, finest.params, finest.driving_seed, finest.eps.value(), gap, std::move(values)};
}

/// dt * #{j >= 1 : values[j] <= 0}
template <typename Scalar>
Scalar nonpositive_measure(const Grid<Scalar>& grid, const Vector<Scalar>& values) {
  const auto count = (values.tail(values.size() - 1).array() <= Scalar(0)).count();
  return grid.step() * Scalar(count);
}

template <typename Scalar>
Scalar nonpositive_measure(const EpsPath<Scalar>& path) {
  return nonpositive_measure(path.grid, path.values);
}

template <typename Scalar>
Scalar nonpositive_measure(const LimitPath<Scalar>& path) {
  return nonpositive_measure(path.grid, path.values);
}

}  // namespace fcir
