#pragma once

#include <algorithm>
#include <string_view>

#include "fcir/errors.hpp"
#include "fcir/fbm.hpp"

namespace fcir {

/// Scale convention for the square-root process equation
///   dY = c * (k / (Y+ + eps) - a Y) dt + c * sigma dB^H.
/// `unit` (c = 1) is the plain form. `half` (c = 1/2) makes X = Y^2 a CIR
/// process with parameters (k, a, sigma).
enum class Convention { unit, half };

template <typename Scalar = double>
struct CirParams {
  Scalar y0;
  Scalar k;
  Scalar a;
  Scalar sigma;
  HurstIndex<Scalar> hurst;
  Convention convention = Convention::unit;

  CirParams(Scalar y0_, Scalar k_, Scalar a_, Scalar sigma_, HurstIndex<Scalar> h,
            Convention c = Convention::unit)
      : y0(y0_), k(k_), a(a_), sigma(sigma_), hurst(h), convention(c) {
    if (!(y0 > Scalar(0))) throw DomainError("CirParams: Y0 must be positive");
    if (k < Scalar(0) || a < Scalar(0) || sigma < Scalar(0))
      throw DomainError("CirParams: k, a, sigma must be nonnegative");
  }

  Scalar drift_scale() const noexcept {
    return convention == Convention::unit ? Scalar(1) : Scalar(0.5);
  }
  Scalar noise_scale() const noexcept { return drift_scale(); }
};

// k and a are allowed to vanish for degenerate test cases; the strictly
// positive regime is enforced where a construction needs it.

template <typename Scalar = double>
class Epsilon {
 public:
  explicit Epsilon(Scalar value) : value_(value) {
    if (!(value > Scalar(0))) throw DomainError("epsilon must be positive");
  }
  Scalar value() const noexcept { return value_; }

 private:
  Scalar value_;
};

enum class DriftKind { indicator, max };

constexpr std::string_view to_string(DriftKind kind) noexcept {
  return kind == DriftKind::indicator ? "indicator" : "max";
}

/// c1 * (k / (y 1{y>0} + eps) - a y)
template <typename Scalar>
Scalar drift_indicator(Scalar y, Epsilon<Scalar> eps, const CirParams<Scalar>& p) {
  const Scalar positive_part = y > Scalar(0) ? y : Scalar(0);
  return p.drift_scale() * (p.k / (positive_part + eps.value()) - p.a * y);
}

/// c1 * (k / max(y, eps) - a y)
template <typename Scalar>
Scalar drift_max(Scalar y, Epsilon<Scalar> eps, const CirParams<Scalar>& p) {
  return p.drift_scale() * (p.k / std::max(y, eps.value()) - p.a * y);
}

template <typename Scalar>
Scalar drift(DriftKind kind, Scalar y, Epsilon<Scalar> eps, const CirParams<Scalar>& p) {
  return kind == DriftKind::indicator ? drift_indicator(y, eps, p) : drift_max(y, eps, p);
}

}  // namespace fcir
