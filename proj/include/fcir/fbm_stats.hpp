#pragma once

// Monte-Carlo covariance checks for fBm samplers.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fcir/fbm.hpp"
#include "fcir/philox.hpp"

namespace fcir {

using Matrix = Eigen::MatrixXd;

/// Empirical second moments of B at the chosen grid nodes.
struct EmpiricalCovariance {
  std::vector<Eigen::Index> nodes;
  long paths = 0;
  Matrix mean_product;  // E[B_i B_j] estimate
  Matrix std_error;     // standard error of each entry
};

struct ZScoreSummary {
  std::size_t cells = 0;
  std::size_t beyond_three = 0;
  double max_abs_z = 0.0;
  double fraction_beyond_three() const { return cells ? double(beyond_three) / double(cells) : 0.0; }
};

/// Two-sided normal quantile giving family-wise level `alpha` over `cells` tests.
inline double bonferroni_z(std::size_t cells, double alpha = 1e-3) {
  const double target = alpha / double(std::max<std::size_t>(cells, 1));
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::erfc(mid / std::sqrt(2.0)) > target ? lo : hi) = mid;
  }
  return hi;
}

/// "Within 3 standard errors" over a whole covariance matrix: with thousands
/// of correlated cells a few percent of exceedances are expected, so the
/// rule allows at most `max_fraction` of cells beyond 3 SE and no cell beyond
/// the Bonferroni bound of the family.
struct ThreeSigmaRule {
  double max_fraction = 0.01;
  double family_alpha = 1e-3;

  bool accepts(const ZScoreSummary& s) const {
    return s.fraction_beyond_three() <= max_fraction && s.max_abs_z <= bonferroni_z(s.cells, family_alpha);
  }
};

template <typename Sampler>
EmpiricalCovariance empirical_covariance(const Sampler& sampler, const std::vector<Eigen::Index>& nodes,
                                         long paths, std::uint64_t master_seed) {
  const Eigen::Index m = static_cast<Eigen::Index>(nodes.size());
  Matrix samples(paths, m);
  for (long i = 0; i < paths; ++i) {
    const auto path = sampler.sample(member_seed(master_seed, std::uint64_t(i)));
    for (Eigen::Index c = 0; c < m; ++c) samples(i, c) = double(path.values[nodes[c]]);
  }
  const Matrix squares = samples.array().square().matrix();
  EmpiricalCovariance out;
  out.nodes = nodes;
  out.paths = paths;
  out.mean_product = (samples.transpose() * samples) / double(paths);
  const Matrix fourth = (squares.transpose() * squares) / double(paths);
  const Matrix variance = (fourth - out.mean_product.cwiseAbs2()).cwiseMax(0.0) * (double(paths) / double(paths - 1));
  out.std_error = (variance / double(paths)).cwiseSqrt();
  return out;
}

/// z-scores of the upper triangle against the closed-form covariance.
template <typename Scalar>
ZScoreSummary compare_to_closed_form(const EmpiricalCovariance& emp, const Grid<Scalar>& grid,
                                     HurstIndex<Scalar> h) {
  ZScoreSummary s;
  const Eigen::Index m = static_cast<Eigen::Index>(emp.nodes.size());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double expected =
          double(fbm_covariance(grid.time(emp.nodes[i]), grid.time(emp.nodes[j]), h));
      const double se = emp.std_error(i, j);
      if (se == 0.0) continue;  // node 0: exactly zero on both sides
      const double z = std::abs(emp.mean_product(i, j) - expected) / se;
      ++s.cells;
      s.beyond_three += z > 3.0;
      s.max_abs_z = std::max(s.max_abs_z, z);
    }
  return s;
}

/// z-scores of the difference between two independent estimates.
inline ZScoreSummary compare_estimates(const EmpiricalCovariance& a, const EmpiricalCovariance& b) {
  ZScoreSummary s;
  const Eigen::Index m = a.mean_product.rows();
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      const double se = std::hypot(a.std_error(i, j), b.std_error(i, j));
      if (se == 0.0) continue;
      const double z = std::abs(a.mean_product(i, j) - b.mean_product(i, j)) / se;
      ++s.cells;
      s.beyond_three += z > 3.0;
      s.max_abs_z = std::max(s.max_abs_z, z);
    }
  return s;
}

/// Nodes 1..n, or `count` nodes spread evenly over 1..n.
inline std::vector<Eigen::Index> spread_nodes(Eigen::Index steps, Eigen::Index count) {
  std::vector<Eigen::Index> nodes;
  if (count >= steps) {
    for (Eigen::Index j = 1; j <= steps; ++j) nodes.push_back(j);
    return nodes;
  }
  for (Eigen::Index c = 1; c <= count; ++c) nodes.push_back((c * steps) / count);
  return nodes;
}

}  // namespace fcir
