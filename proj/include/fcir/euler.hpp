#pragma once

#include <cstdint>
#include <string>

#include "fcir/drift.hpp"
#include "fcir/fbm.hpp"

namespace fcir {

template <typename Scalar = double>
struct EpsPath {
  Grid<Scalar> grid;
  Epsilon<Scalar> eps;
  CirParams<Scalar> params;
  DriftKind drift_kind;
  std::uint64_t driving_seed;
  Scalar stability_ratio;  // c1 k dt / eps
  Vector<Scalar> values;
};

inline constexpr double kStabilityWarn = 0.1;
inline constexpr double kStabilityAbort = 1.0;

/// c1 k dt / eps: how far one drift step can move the path, in units of eps.
template <typename Scalar>
Scalar stability_ratio(const CirParams<Scalar>& p, Epsilon<Scalar> eps, Scalar dt) {
  return p.drift_scale() * p.k * dt / eps.value();
}

/// dt * c1 (k / eps^2 + a), the Lipschitz constant of the drift times the step.
/// Below 1 the Euler map y -> y + drift(y) dt is strictly increasing, which
/// makes the discrete recursion inherit the comparison ordering exactly.
template <typename Scalar>
Scalar monotone_step_ratio(const CirParams<Scalar>& p, Epsilon<Scalar> eps, Scalar dt) {
  const Scalar e = eps.value();
  return dt * p.drift_scale() * (p.k / (e * e) + p.a);
}

/// Explicit Euler for the epsilon-approximation driven by the exact
/// increments of `fbm`:
///   y[j+1] = y[j] + drift(y[j]) dt + c2 sigma (B[j+1] - B[j]).
template <typename Scalar>
EpsPath<Scalar> simulate_eps_path(const CirParams<Scalar>& p, Epsilon<Scalar> eps,
                                  const FbmPath<Scalar>& fbm, DriftKind kind) {
  if (!(fbm.hurst == p.hurst)) throw DomainError("simulate_eps_path: fbm Hurst index differs from params");
  const Scalar dt = fbm.grid.step();
  const Scalar ratio = stability_ratio(p, eps, dt);
  if (ratio > Scalar(kStabilityAbort))
    throw StabilityError("euler step too coarse: c1 k dt / eps = " + std::to_string(double(ratio)),
                         double(ratio));

  const Eigen::Index n = fbm.grid.steps();
  const Scalar noise = p.noise_scale() * p.sigma;
  const auto& b = fbm.values;
  Vector<Scalar> y(n + 1);
  y[0] = p.y0;
  if (kind == DriftKind::indicator) {
    for (Eigen::Index j = 0; j < n; ++j)
      y[j + 1] = y[j] + drift_indicator(y[j], eps, p) * dt + noise * (b[j + 1] - b[j]);
  } else {
    for (Eigen::Index j = 0; j < n; ++j)
      y[j + 1] = y[j] + drift_max(y[j], eps, p) * dt + noise * (b[j + 1] - b[j]);
  }
  return {fbm.grid, eps, p, kind, fbm.seed, ratio, std::move(y)};
}

}  // namespace fcir
