#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "fcir/strat.hpp"

namespace fcir {

/// Pathwise moment bound |Y_eps(t)|^r <= C1 + C2 sup|B^H|^r with
///   C1 = exp((8aT)^r) ((4 Y0)^r + (16 k T / Y0)^r),  C2 = (8 sigma)^r exp((8aT)^r).
/// The exponent overflows double already for (8aT)^r > 709, so the constants
/// are held as logarithms.
struct MomentBound {
  double r;
  double horizon;
  double log_c1;
  double log_c2;

  double c1() const { return std::exp(log_c1); }
  double c2() const { return std::exp(log_c2); }
};

namespace detail {

inline double log_add_exp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double hi = std::max(x, y), lo = std::min(x, y);
  return hi + std::log1p(std::exp(lo - hi));
}

inline double safe_log(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

}  // namespace detail

template <typename Scalar>
MomentBound moment_bound_constants(const CirParams<Scalar>& p, double horizon, double r) {
  if (!(r >= 1.0)) throw DomainError("moment bound needs r >= 1");
  if (!(horizon > 0.0)) throw DomainError("moment bound needs T > 0");
  const double y0 = double(p.y0), k = double(p.k), a = double(p.a), sigma = double(p.sigma);
  const double growth = std::pow(8.0 * a * horizon, r);
  const double log_c1 = growth + detail::log_add_exp(r * std::log(4.0 * y0),
                                                     r * detail::safe_log(16.0 * k * horizon / y0));
  const double log_c2 = r * detail::safe_log(8.0 * sigma) + growth;
  return {r, horizon, log_c1, log_c2};
}

struct MomentReport {
  bool pass = true;
  std::size_t violations = 0;
  Eigen::Index worst_node = 0;
  double log_slack = std::numeric_limits<double>::infinity();  // log(bound) - log|Y|^r at worst node
};

/// Exact check of the moment bound at every node of `values` against the
/// running maximum of |B| over the whole horizon.
template <typename Scalar>
MomentReport check_moment_bound(const Vector<Scalar>& values, const FbmPath<Scalar>& fbm,
                                const MomentBound& mb) {
  if (values.size() != fbm.values.size()) throw DomainError("moment check: path and fbm grids differ");
  const double sup_b = double(fbm.values.cwiseAbs().maxCoeff());
  const double log_bound = detail::log_add_exp(mb.log_c1, mb.log_c2 + mb.r * detail::safe_log(sup_b));
  const bool linear = std::isfinite(std::exp(log_bound));
  const double bound = linear ? mb.c1() + mb.c2() * std::pow(sup_b, mb.r) : 0.0;

  MomentReport report;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const double y = std::abs(double(values[j]));
    const double log_lhs = mb.r * detail::safe_log(y);
    const bool ok = linear ? std::pow(y, mb.r) <= bound : log_lhs <= log_bound;
    if (!ok) {
      report.pass = false;
      ++report.violations;
    }
    const double slack = log_bound - log_lhs;
    if (slack < report.log_slack) {
      report.log_slack = slack;
      report.worst_node = j;
    }
  }
  return report;
}

template <typename Scalar>
MomentReport check_moment_bound(const EpsPath<Scalar>& path, const FbmPath<Scalar>& fbm,
                                const MomentBound& mb) {
  if (path.params.convention != Convention::unit)
    throw DomainError("moment bound constants assume the unit convention");
  if (!(path.grid == fbm.grid)) throw DomainError("moment check: grids differ");
  return check_moment_bound(path.values, fbm, mb);
}

/// First node with value <= threshold, if any.
template <typename Scalar>
std::optional<Eigen::Index> first_hit(const Vector<Scalar>& values, Scalar threshold) {
  for (Eigen::Index j = 0; j < values.size(); ++j)
    if (!(values[j] > threshold)) return j;
  return std::nullopt;
}

/// Z(t) = e^{-at} (Y0 + int_0^t k e^{as} / Y(s) ds + sigma int_0^t e^{as} dB^H(s))
/// on nodes 0..last. The fBm integral is e^{at} B(t) - a int_0^t e^{as} B(s) ds;
/// Lebesgue integrals use the trapezoid rule.
template <typename Scalar>
Vector<Scalar> explicit_transform(const Vector<Scalar>& y, const FbmPath<Scalar>& fbm,
                                  const CirParams<Scalar>& p, Eigen::Index last, Scalar threshold) {
  if (p.convention != Convention::unit) throw DomainError("explicit transform assumes the unit convention");
  if (y.size() != fbm.values.size()) throw DomainError("explicit transform: grids differ");
  if (last < 0 || last >= y.size()) throw DomainError("explicit transform: range outside the grid");
  for (Eigen::Index j = 0; j <= last; ++j)
    if (!(y[j] > threshold))
      throw DomainError("explicit transform: path reaches the threshold at node " + std::to_string(j));

  using std::exp;
  const auto& grid = fbm.grid;
  const Scalar dt = grid.step();
  Vector<Scalar> z(last + 1);
  z[0] = p.y0;
  Scalar drift_integral = Scalar(0);  // int k e^{as} / Y ds
  Scalar noise_integral = Scalar(0);  // int e^{as} B ds
  Scalar prev_growth = Scalar(1);
  for (Eigen::Index j = 1; j <= last; ++j) {
    const Scalar growth = exp(p.a * grid.time(j));
    drift_integral += dt / Scalar(2) * p.k * (prev_growth / y[j - 1] + growth / y[j]);
    noise_integral += dt / Scalar(2) * (prev_growth * fbm.values[j - 1] + growth * fbm.values[j]);
    const Scalar young = growth * fbm.values[j] - p.a * noise_integral;
    z[j] = (p.y0 + drift_integral + p.sigma * young) / growth;
    prev_growth = growth;
  }
  return z;
}

template <typename Scalar>
Scalar relative_sup_gap(const Vector<Scalar>& reference, const Vector<Scalar>& other) {
  const Eigen::Index n = std::min(reference.size(), other.size());
  return (reference.head(n) - other.head(n)).cwiseAbs().maxCoeff() / reference.head(n).cwiseAbs().maxCoeff();
}

struct CoincidenceReport {
  double bound;  // 2 eps
  double sup_diff;
  Eigen::Index argmax;
  double min_diff;
  bool pass;
};

/// Max-drift minus indicator-drift paths on one fBm path; passes iff the
/// difference stays in [0, 2 eps) at every node.
template <typename Scalar>
CoincidenceReport coincidence_report(const EpsPath<Scalar>& indicator, const EpsPath<Scalar>& maxed) {
  const Vector<Scalar> diff = maxed.values - indicator.values;
  Eigen::Index arg = 0;
  const double sup = double(diff.maxCoeff(&arg));
  const double low = double(diff.minCoeff());
  const double bound = 2.0 * double(indicator.eps.value());
  return {bound, sup, arg, low, low >= 0.0 && sup < bound};
}

template <typename Scalar>
CoincidenceReport coincidence_study(const CirParams<Scalar>& p, const FbmPath<Scalar>& fbm,
                                    Epsilon<Scalar> eps) {
  return coincidence_report(simulate_eps_path(p, eps, fbm, DriftKind::indicator),
                            simulate_eps_path(p, eps, fbm, DriftKind::max));
}

}  // namespace fcir
