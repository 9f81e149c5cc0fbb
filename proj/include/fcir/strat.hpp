#pragma once

// Pathwise Stratonovich midpoint sums and the CIR equation residual for
// X = Y^2 on positivity intervals of the square-root process.

#include <cmath>
#include <span>
#include <vector>

#include "fcir/zeroset.hpp"

namespace fcir {

template <typename Scalar = double>
struct CirPath {
  Grid<Scalar> grid;
  std::uint64_t driving_seed;
  Vector<Scalar> values;  // X = Y^2
  Vector<Scalar> root;    // |Y|, used as sqrt(X)
};

template <typename Scalar>
CirPath<Scalar> cir_process(const LimitPath<Scalar>& y) {
  return {y.grid, y.driving_seed, y.values.array().square().matrix(), y.values.cwiseAbs()};
}

namespace detail {

// Neumaier compensated accumulator.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) noexcept {
    using std::abs;
    const Scalar t = sum_ + x;
    if (abs(sum_) >= abs(x))
      carry_ += (sum_ - t) + x;
    else
      carry_ += (x - t) + sum_;
    sum_ = t;
  }
  Scalar value() const noexcept { return sum_ + carry_; }

 private:
  Scalar sum_ = Scalar(0);
  Scalar carry_ = Scalar(0);
};

inline void check_partition(std::span<const Eigen::Index> nodes, Eigen::Index size) {
  if (nodes.size() < 2) throw DomainError("partition needs at least two nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] < 0 || nodes[i] >= size) throw DomainError("partition node outside the grid");
    if (i > 0 && !(nodes[i] > nodes[i - 1])) throw DomainError("partition nodes must increase");
  }
}

}  // namespace detail

/// Nodes j0, j0 + step, ... and always j1 itself.
inline std::vector<Eigen::Index> subsampled_partition(Eigen::Index j0, Eigen::Index j1, Eigen::Index step) {
  if (step < 1) throw DomainError("coarsening factor must be >= 1");
  std::vector<Eigen::Index> nodes;
  for (Eigen::Index j = j0; j < j1; j += step) nodes.push_back(j);
  nodes.push_back(j1);
  return nodes;
}

/// sum_k (u[t_k] + u[t_{k-1}]) / 2 * (v[t_k] - v[t_{k-1}]) over the partition.
template <typename Scalar>
Scalar stratonovich_sum(const Vector<Scalar>& u, const Vector<Scalar>& v,
                        std::span<const Eigen::Index> nodes) {
  if (u.size() != v.size()) throw DomainError("stratonovich_sum: paths differ in length");
  detail::check_partition(nodes, u.size());
  detail::CompensatedSum<Scalar> acc;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto a = nodes[i - 1], b = nodes[i];
    acc.add((u[b] + u[a]) / Scalar(2) * (v[b] - v[a]));
  }
  return acc.value();
}

template <typename Scalar>
Scalar stratonovich_sum(const Vector<Scalar>& u, const Vector<Scalar>& v, Eigen::Index j0,
                        Eigen::Index j1) {
  if (!(j0 < j1) || j0 < 0 || j1 >= u.size())
    throw DomainError("stratonovich_sum: invalid node range");
  const auto nodes = subsampled_partition(j0, j1, 1);
  return stratonovich_sum(u, v, std::span<const Eigen::Index>(nodes));
}

/// Running Stratonovich sums and trapezoid integrals along a partition.
/// Entry i holds the value over nodes[0]..nodes[i]; entry 0 is zero.
template <typename Scalar>
Vector<Scalar> running_stratonovich(const Vector<Scalar>& u, const Vector<Scalar>& v,
                                    std::span<const Eigen::Index> nodes) {
  Vector<Scalar> out(static_cast<Eigen::Index>(nodes.size()));
  out[0] = Scalar(0);
  detail::CompensatedSum<Scalar> acc;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto a = nodes[i - 1], b = nodes[i];
    acc.add((u[b] + u[a]) / Scalar(2) * (v[b] - v[a]));
    out[Eigen::Index(i)] = acc.value();
  }
  return out;
}

template <typename Scalar>
Vector<Scalar> running_trapezoid(const Grid<Scalar>& grid, const Vector<Scalar>& f,
                                 std::span<const Eigen::Index> nodes) {
  Vector<Scalar> out(static_cast<Eigen::Index>(nodes.size()));
  out[0] = Scalar(0);
  detail::CompensatedSum<Scalar> acc;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto a = nodes[i - 1], b = nodes[i];
    acc.add((f[a] + f[b]) / Scalar(2) * (grid.time(b) - grid.time(a)));
    out[Eigen::Index(i)] = acc.value();
  }
  return out;
}

struct ResidualLevel {
  Eigen::Index coarsen;
  double mesh;
  double sup_residual;
};

struct ResidualReport {
  Interval interval;
  std::vector<ResidualLevel> levels;  // coarsen 4, 2, 1: decreasing mesh
};

namespace detail {

template <typename Scalar>
void require_half_convention(const CirParams<Scalar>& p) {
  if (p.convention != Convention::half)
    throw DomainError("CIR residual needs the half convention (c1 = c2 = 1/2)");
}

}  // namespace detail

/// X(t) - X(alpha) - int_alpha^t (k - aX) ds - sigma * S(sqrt X, B)|_alpha^t at
/// every node of the interval subsampled by `coarsen`.
template <typename Scalar>
Vector<Scalar> cir_residual_path(const CirPath<Scalar>& x, const FbmPath<Scalar>& fbm,
                                 const CirParams<Scalar>& p, const Interval& iv, Eigen::Index coarsen = 1) {
  detail::require_half_convention(p);
  if (iv.node_count() < 3) throw SizeError("CIR residual needs an interval of at least 3 nodes");
  if (!(x.grid == fbm.grid)) throw DomainError("CIR residual: grids differ");
  const auto nodes = subsampled_partition(iv.alpha, iv.beta, coarsen);
  const std::span<const Eigen::Index> part(nodes);
  const Vector<Scalar> rate = (Scalar(p.k) - p.a * x.values.array()).matrix();
  const Vector<Scalar> lebesgue = running_trapezoid(x.grid, rate, part);
  const Vector<Scalar> strat = running_stratonovich(x.root, fbm.values, part);
  Vector<Scalar> residual(lebesgue.size());
  for (Eigen::Index i = 0; i < residual.size(); ++i)
    residual[i] = x.values[nodes[i]] - x.values[iv.alpha] - lebesgue[i] - p.sigma * strat[i];
  residual[0] = Scalar(0);
  return residual;
}

inline constexpr Eigen::Index kReportedCoarsenings[] = {4, 2, 1};

template <typename Scalar>
ResidualReport cir_residual_on_interval(const CirPath<Scalar>& x, const FbmPath<Scalar>& fbm,
                                        const CirParams<Scalar>& p, const Interval& iv) {
  ResidualReport report{iv, {}};
  for (Eigen::Index c : kReportedCoarsenings) {
    const auto r = cir_residual_path(x, fbm, p, iv, c);
    report.levels.push_back({c, double(x.grid.step()) * double(c), double(r.cwiseAbs().maxCoeff())});
  }
  return report;
}

/// Y(t) - Y(alpha) - 1/2 int (k/Y - aY) ds - sigma/2 (B(t) - B(alpha)) on the
/// interval nodes strictly before beta, where Y stays above the threshold.
template <typename Scalar>
Vector<Scalar> sqrt_residual_path(const LimitPath<Scalar>& y, const FbmPath<Scalar>& fbm,
                                  const Interval& iv, Eigen::Index coarsen = 1) {
  const auto& p = y.params;
  detail::require_half_convention(p);
  const Eigen::Index end = iv.reaches_horizon ? iv.beta : iv.beta - 1;
  if (end - iv.alpha < 2) throw SizeError("sqrt residual needs at least 3 interior nodes");
  const auto nodes = subsampled_partition(iv.alpha, end, coarsen);
  const std::span<const Eigen::Index> part(nodes);
  Vector<Scalar> rate(y.values.size());
  for (const auto j : nodes) rate[j] = p.k / y.values[j] - p.a * y.values[j];
  const Vector<Scalar> lebesgue = running_trapezoid(y.grid, rate, part);
  Vector<Scalar> residual(lebesgue.size());
  for (Eigen::Index i = 0; i < residual.size(); ++i)
    residual[i] = y.values[nodes[i]] - y.values[iv.alpha] - lebesgue[i] / Scalar(2) -
                  p.sigma / Scalar(2) * (fbm.values[nodes[i]] - fbm.values[iv.alpha]);
  return residual;
}

namespace detail {

inline const Interval& containing_interval(const PositivityIntervals& ivs, Eigen::Index t) {
  if (ivs.empty()) throw DomainError("piecewise integral: empty positivity decomposition");
  const Interval* nearest = &ivs.intervals.front();
  Eigen::Index best = -1;
  for (const auto& iv : ivs.intervals) {
    if (iv.alpha <= t && t <= iv.beta) return iv;
    const Eigen::Index dist = t < iv.alpha ? iv.alpha - t : t - iv.beta;
    if (best < 0 || dist < best) {
      best = dist;
      nearest = &iv;
    }
  }
  throw DomainError("node " + std::to_string(t) + " lies outside every positivity interval; nearest is (" +
                    std::to_string(nearest->alpha) + ", " + std::to_string(nearest->beta) + ")");
}

}  // namespace detail

/// Stratonovich integral of sqrt(X) against B^H over [0, beta0), every
/// earlier interval, and [alpha, t) of the interval containing t.
template <typename Scalar>
Scalar piecewise_strat_integral(const CirPath<Scalar>& x, const FbmPath<Scalar>& fbm,
                                const PositivityIntervals& ivs, Eigen::Index t, Eigen::Index coarsen = 1) {
  const Interval& current = detail::containing_interval(ivs, t);
  detail::CompensatedSum<Scalar> acc;
  for (const auto& iv : ivs.intervals) {
    if (iv.alpha >= current.alpha) break;
    const auto nodes = subsampled_partition(iv.alpha, iv.beta, coarsen);
    acc.add(stratonovich_sum(x.root, fbm.values, std::span<const Eigen::Index>(nodes)));
  }
  if (t > current.alpha) {
    const auto nodes = subsampled_partition(current.alpha, t, coarsen);
    acc.add(stratonovich_sum(x.root, fbm.values, std::span<const Eigen::Index>(nodes)));
  }
  return acc.value();
}

/// sup over interval nodes t of |X(t) - X(0) - int_0^t (k - aX) ds - sigma * piecewise(t)|.
template <typename Scalar>
Scalar piecewise_sup_residual(const CirPath<Scalar>& x, const FbmPath<Scalar>& fbm,
                              const CirParams<Scalar>& p, const PositivityIntervals& ivs,
                              Eigen::Index coarsen = 1) {
  detail::require_half_convention(p);
  if (ivs.empty()) throw DomainError("piecewise residual: empty positivity decomposition");
  const Vector<Scalar> rate = (Scalar(p.k) - p.a * x.values.array()).matrix();
  using std::abs;
  Scalar sup = Scalar(0);
  Scalar done_strat = Scalar(0);
  for (const auto& iv : ivs.intervals) {
    const auto nodes = subsampled_partition(iv.alpha, iv.beta, coarsen);
    const std::span<const Eigen::Index> part(nodes);
    const Vector<Scalar> strat = running_stratonovich(x.root, fbm.values, part);
    const auto to_alpha = subsampled_partition(0, std::max<Eigen::Index>(iv.alpha, 1), coarsen);
    Scalar lebesgue = iv.alpha == 0
                          ? Scalar(0)
                          : running_trapezoid(x.grid, rate, std::span<const Eigen::Index>(to_alpha)).tail(1)[0];
    const Vector<Scalar> inside = running_trapezoid(x.grid, rate, part);
    for (Eigen::Index i = 0; i < strat.size(); ++i) {
      const Eigen::Index t = nodes[i];
      const Scalar r = x.values[t] - x.values[0] - (lebesgue + inside[i]) - p.sigma * (done_strat + strat[i]);
      sup = std::max(sup, abs(r));
    }
    done_strat += strat.tail(1)[0];
  }
  return sup;
}

}  // namespace fcir
