#include <doctest.h>

#include "fcir/zeroset.hpp"

using namespace fcir;

namespace {
Vector<double> vec(std::initializer_list<double> xs) {
  Vector<double> v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("positivity intervals of a small path") {
  const auto ivs = positivity_intervals(vec({1, 1, 0, 2, 2, 0}), 0.0);
  REQUIRE(ivs.intervals.size() == 2);
  CHECK(ivs.intervals[0].alpha == 0);
  CHECK(ivs.intervals[0].beta == 2);
  CHECK(ivs.intervals[0].closed_open);
  CHECK(ivs.intervals[1].alpha == 2);
  CHECK(ivs.intervals[1].beta == 5);
  CHECK_FALSE(ivs.intervals[1].closed_open);
  CHECK_FALSE(ivs.intervals[1].reaches_horizon);
  CHECK(ivs.discarded_runs == 0);
}

TEST_CASE("interval reaching the horizon and short runs") {
  const auto ivs = positivity_intervals(vec({0, 1, 0, 0, 1, 1}), 0.0);
  // the single node run at 1 spans (0, 2): 3 nodes, kept
  REQUIRE(ivs.intervals.size() == 2);
  CHECK(ivs.intervals[1].alpha == 3);
  CHECK(ivs.intervals[1].beta == 5);
  CHECK(ivs.intervals[1].reaches_horizon);

  const auto strict = positivity_intervals(vec({0, 1, 0, 0, 1, 1}), 0.0, 4);
  CHECK(strict.intervals.empty());
  CHECK(strict.discarded_runs == 2);

  const auto tail = positivity_intervals(vec({0, 0, 0, 0, 0, 1}), 0.0);
  CHECK(tail.intervals.empty());
  CHECK(tail.discarded_runs == 1);
}

TEST_CASE("threshold handling") {
  CHECK(positivity_intervals(vec({-1, -1, -1}), 0.0).empty());
  const auto all = positivity_intervals(vec({1, 1, 1, 1}), 0.0);
  REQUIRE(all.intervals.size() == 1);
  CHECK(all.intervals[0].closed_open);
  CHECK(all.intervals[0].reaches_horizon);
  CHECK(positivity_intervals(vec({0.5, 0.5, 0.5}), 0.5).empty());
  CHECK_THROWS_AS(positivity_intervals(vec({1, 1}), -1.0), DomainError);
}

TEST_CASE("limit path threshold must dominate the achieved tolerance") {
  const Grid<double> grid(1.0, 3);
  const CirParams<double> p(1, 1, 1, 1, HurstIndex<double>(0.3));
  const LimitPath<double> lim{grid, p, 0, 0.01, 0.002, vec({1, 1, 1, 1})};
  CHECK_THROWS_AS(positivity_intervals(lim, 0.001), DomainError);
  CHECK(positivity_intervals(lim, default_threshold(lim)).intervals.size() == 1);
  CHECK(default_threshold(lim) == 0.002);
}
