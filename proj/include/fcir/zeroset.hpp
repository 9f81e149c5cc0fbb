#pragma once

#include <vector>

#include "fcir/limit.hpp"

namespace fcir {

/// Positivity interval between grid nodes alpha < beta. The first interval of
/// a path starting above the threshold is [0, beta); all others are open.
struct Interval {
  Eigen::Index alpha;
  Eigen::Index beta;
  bool closed_open = false;
  bool reaches_horizon = false;  // beta is the final node and the path is still above threshold

  Eigen::Index node_count() const noexcept { return beta - alpha + 1; }
};

struct PositivityIntervals {
  double threshold = 0.0;
  std::vector<Interval> intervals;
  std::size_t discarded_runs = 0;

  bool empty() const noexcept { return intervals.empty(); }
};

inline constexpr Eigen::Index kDefaultMinNodes = 3;

/// Maximal runs of nodes with value > threshold. Intervals spanning fewer
/// than `min_nodes` grid nodes (endpoints included) are counted in
/// `discarded_runs` instead of being reported.
template <typename Scalar>
PositivityIntervals positivity_intervals(const Vector<Scalar>& values, Scalar threshold,
                                         Eigen::Index min_nodes = kDefaultMinNodes) {
  if (threshold < Scalar(0)) throw DomainError("positivity_intervals: threshold must be >= 0");
  PositivityIntervals out;
  out.threshold = double(threshold);
  const Eigen::Index last = values.size() - 1;
  Eigen::Index j = 0;
  while (j <= last) {
    if (!(values[j] > threshold)) {
      ++j;
      continue;
    }
    const Eigen::Index run_start = j;
    while (j <= last && values[j] > threshold) ++j;
    Interval iv;
    iv.closed_open = run_start == 0;
    iv.alpha = run_start == 0 ? 0 : run_start - 1;
    iv.reaches_horizon = j > last;
    iv.beta = iv.reaches_horizon ? last : j;
    if (iv.node_count() < min_nodes)
      ++out.discarded_runs;
    else
      out.intervals.push_back(iv);
  }
  return out;
}

template <typename Scalar>
PositivityIntervals positivity_intervals(const LimitPath<Scalar>& path, Scalar threshold,
                                         Eigen::Index min_nodes = kDefaultMinNodes) {
  if (threshold < path.achieved_tol)
    throw DomainError("positivity_intervals: threshold below the ladder's achieved tolerance");
  return positivity_intervals(path.values, threshold, min_nodes);
}

/// The default threshold max(achieved_tol, 1e-8).
template <typename Scalar>
Scalar default_threshold(const LimitPath<Scalar>& path) {
  return std::max(path.achieved_tol, Scalar(1e-8));
}

}  // namespace fcir
