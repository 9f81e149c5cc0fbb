#pragma once

// Fractional Brownian motion on a uniform grid: covariance, exact samplers,
// and the empirical Hoelder coefficient.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "fcir/errors.hpp"
#include "fcir/grid.hpp"
#include "fcir/philox.hpp"

namespace fcir {

template <typename Scalar = double>
class HurstIndex {
 public:
  explicit HurstIndex(Scalar value) : value_(value) {
    if (!(value > Scalar(0) && value < Scalar(1)))
      throw DomainError("Hurst index must lie in (0, 1)");
  }
  Scalar value() const noexcept { return value_; }
  friend bool operator==(HurstIndex a, HurstIndex b) noexcept { return a.value_ == b.value_; }

 private:
  Scalar value_;
};

template <typename Scalar = double>
struct FbmPath {
  Grid<Scalar> grid;
  HurstIndex<Scalar> hurst;
  std::uint64_t seed;
  Vector<Scalar> values;  // B^H(t_j), j = 0..n
};

template <typename Scalar = double>
struct HolderEstimate {
  Scalar gamma;
  Scalar coefficient;
};

/// E[B(s) B(t)] = (s^2H + t^2H - |t - s|^2H) / 2.
template <typename Scalar>
Scalar fbm_covariance(Scalar s, Scalar t, HurstIndex<Scalar> h) {
  if (s < Scalar(0) || t < Scalar(0)) throw DomainError("fbm_covariance: negative time");
  using std::abs;
  using std::pow;
  const Scalar two_h = Scalar(2) * h.value();
  return (pow(s, two_h) + pow(t, two_h) - pow(abs(t - s), two_h)) / Scalar(2);
}

/// Autocovariance of unit-step fractional Gaussian noise at integer lag.
template <typename Scalar>
Scalar fgn_autocovariance(Eigen::Index lag, HurstIndex<Scalar> h) {
  using std::abs;
  using std::pow;
  const Scalar two_h = Scalar(2) * h.value();
  const Scalar k = abs(Scalar(lag));
  return (pow(k + 1, two_h) - Scalar(2) * pow(k, two_h) + pow(abs(k - 1), two_h)) / Scalar(2);
}

/// Davies-Harte sampler: the increment autocovariance is embedded in a
/// circulant of size 2n whose spectrum is computed once per (grid, H).
template <typename Scalar = double>
class CirculantFbmSampler {
 public:
  static constexpr double kEigenTolerance = 1e-10;

  CirculantFbmSampler(const Grid<Scalar>& grid, HurstIndex<Scalar> h) : grid_(grid), hurst_(h) {
    const Eigen::Index n = grid.steps();
    const Eigen::Index m = 2 * n;
    std::vector<Scalar> row(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k <= n; ++k) row[k] = fgn_autocovariance(k, h);
    for (Eigen::Index k = n + 1; k < m; ++k) row[k] = row[m - k];

    std::vector<std::complex<Scalar>> spectrum;
    Eigen::FFT<Scalar> fft;
    fft.fwd(spectrum, row);

    Scalar largest = Scalar(0);
    for (const auto& z : spectrum) largest = std::max(largest, z.real());
    amplitude_.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      Scalar lambda = spectrum[k].real();
      if (lambda < Scalar(0)) {
        if (-lambda > Scalar(kEigenTolerance) * largest)
          throw InternalError("circulant embedding has a negative eigenvalue " +
                              std::to_string(double(lambda)));
        lambda = Scalar(0);
      }
      using std::sqrt;
      amplitude_[k] = sqrt(lambda / Scalar(m));
    }
    using std::pow;
    increment_scale_ = pow(grid.step(), h.value());
  }

  const Grid<Scalar>& grid() const noexcept { return grid_; }
  HurstIndex<Scalar> hurst() const noexcept { return hurst_; }

  FbmPath<Scalar> sample(std::uint64_t seed) const {
    const Eigen::Index n = grid_.steps();
    const Eigen::Index m = 2 * n;
    GaussianStream normal(seed);
    std::vector<std::complex<Scalar>> weights(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) {
      const Scalar re = Scalar(normal());
      const Scalar im = Scalar(normal());
      weights[k] = amplitude_[k] * std::complex<Scalar>(re, im);
    }
    std::vector<std::complex<Scalar>> noise;
    Eigen::FFT<Scalar> fft;
    fft.fwd(noise, weights);

    Vector<Scalar> values(n + 1);
    values[0] = Scalar(0);
    for (Eigen::Index j = 0; j < n; ++j)
      values[j + 1] = values[j] + increment_scale_ * noise[j].real();
    return {grid_, hurst_, seed, std::move(values)};
  }

 private:
  Grid<Scalar> grid_;
  HurstIndex<Scalar> hurst_;
  Vector<Scalar> amplitude_;
  Scalar increment_scale_;
};

/// Dense Cholesky sampler over the nodes t_1..t_n; small grids only.
template <typename Scalar = double>
class CholeskyFbmSampler {
 public:
  static constexpr Eigen::Index kMaxSteps = 4096;

  CholeskyFbmSampler(const Grid<Scalar>& grid, HurstIndex<Scalar> h) : grid_(grid), hurst_(h) {
    const Eigen::Index n = grid.steps();
    if (n > kMaxSteps)
      throw SizeError("cholesky sampler supports at most " + std::to_string(kMaxSteps) +
                      " steps, got " + std::to_string(n));
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        cov(i, j) = cov(j, i) = fbm_covariance(grid.time(i + 1), grid.time(j + 1), h);
    Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(cov);
    if (llt.info() != Eigen::Success) throw InternalError("fbm covariance is not positive definite");
    factor_ = llt.matrixL();
  }

  const Grid<Scalar>& grid() const noexcept { return grid_; }
  HurstIndex<Scalar> hurst() const noexcept { return hurst_; }

  FbmPath<Scalar> sample(std::uint64_t seed) const {
    const Eigen::Index n = grid_.steps();
    GaussianStream normal(seed);
    Vector<Scalar> z(n);
    for (Eigen::Index k = 0; k < n; ++k) z[k] = Scalar(normal());
    Vector<Scalar> values(n + 1);
    values[0] = Scalar(0);
    values.tail(n).noalias() = factor_.template triangularView<Eigen::Lower>() * z;
    return {grid_, hurst_, seed, std::move(values)};
  }

 private:
  Grid<Scalar> grid_;
  HurstIndex<Scalar> hurst_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> factor_;
};

template <typename Scalar>
FbmPath<Scalar> sample_fbm_circulant(const Grid<Scalar>& grid, HurstIndex<Scalar> h,
                                     std::uint64_t seed) {
  return CirculantFbmSampler<Scalar>(grid, h).sample(seed);
}

template <typename Scalar>
FbmPath<Scalar> sample_fbm_cholesky(const Grid<Scalar>& grid, HurstIndex<Scalar> h,
                                    std::uint64_t seed) {
  return CholeskyFbmSampler<Scalar>(grid, h).sample(seed);
}

/// max |B(t) - B(s)| / (t - s)^(H - gamma) over grid pairs s < t.
///
/// Grids up to 4096 steps are scanned exhaustively. Larger grids use every
/// lag up to 1024 plus all power-of-two lags; for H < 1/2 the maximum sits
/// at short lags.
template <typename Scalar>
HolderEstimate<Scalar> holder_coefficient(const FbmPath<Scalar>& path, Scalar gamma) {
  const Scalar h = path.hurst.value();
  if (!(gamma > Scalar(0) && gamma < h)) throw DomainError("holder_coefficient: gamma must lie in (0, H)");
  const Eigen::Index n = path.grid.steps();
  const Scalar exponent = h - gamma;
  const auto& b = path.values;

  Scalar best = Scalar(0);
  auto scan_lag = [&](Eigen::Index lag) {
    using std::pow;
    const Scalar scale = pow(Scalar(lag) * path.grid.step(), -exponent);
    const auto diff = (b.segment(lag, n + 1 - lag) - b.head(n + 1 - lag)).cwiseAbs();
    best = std::max(best, diff.maxCoeff() * scale);
  };

  constexpr Eigen::Index kFullScan = 4096;
  constexpr Eigen::Index kShortLags = 1024;
  if (n <= kFullScan) {
    for (Eigen::Index lag = 1; lag <= n; ++lag) scan_lag(lag);
  } else {
    for (Eigen::Index lag = 1; lag <= kShortLags; ++lag) scan_lag(lag);
    for (Eigen::Index lag = 2 * kShortLags; lag <= n; lag *= 2) scan_lag(lag);
  }
  return {gamma, best};
}

}  // namespace fcir
