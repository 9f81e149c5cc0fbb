#include <doctest.h>

#include "fcir/verify.hpp"

using namespace fcir;

TEST_CASE("moment bound constants") {
  const CirParams<double> p(1, 1, 1, 1, HurstIndex<double>(0.3));
  const auto mb = moment_bound_constants(p, 1.0, 1.0);
  CHECK(mb.c1() == doctest::Approx(59619.1597408345655).epsilon(1e-13));
  CHECK(mb.c2() == doctest::Approx(23847.6638963338262).epsilon(1e-13));
  const auto r4 = moment_bound_constants(p, 1.0, 4.0);
  CHECK(r4.log_c1 == doctest::Approx(4096.0 + std::log(256.0 + 65536.0)).epsilon(1e-14));
  CHECK(r4.log_c2 == doctest::Approx(4096.0 + 4 * std::log(8.0)).epsilon(1e-14));
  CHECK_FALSE(std::isfinite(r4.c1()));
  CHECK_THROWS_AS(moment_bound_constants(p, 1.0, 0.5), DomainError);
  // k = 0 drops the second term of C1
  const CirParams<double> no_k(1, 0, 1, 1, HurstIndex<double>(0.3));
  CHECK(moment_bound_constants(no_k, 1.0, 2.0).log_c1 == doctest::Approx(64.0 + 2 * std::log(4.0)));
}

TEST_CASE("moment check on paths") {
  const HurstIndex<double> h(0.3);
  const CirParams<double> p(1, 1, 1, 1, h);
  const Grid<double> grid(1.0, 10000);
  const auto fbm = sample_fbm_circulant(grid, h, 3);
  const auto path = simulate_eps_path(p, Epsilon<double>(0.01), fbm, DriftKind::indicator);
  for (double r : {1.0, 2.0, 4.0}) {
    const auto rep = check_moment_bound(path, fbm, moment_bound_constants(p, 1.0, r));
    CHECK(rep.pass);
    CHECK(rep.log_slack > 0);
  }
  Vector<double> huge = Vector<double>::Constant(grid.nodes(), 1e7);
  const auto rep = check_moment_bound(huge, fbm, moment_bound_constants(p, 1.0, 1.0));
  CHECK_FALSE(rep.pass);
  CHECK(rep.violations == std::size_t(grid.nodes()));
  // at r = 4 the bound is about e^4096, beyond every double
  huge.setConstant(1e300);
  const auto log_rep = check_moment_bound(huge, fbm, moment_bound_constants(p, 1.0, 4.0));
  CHECK(log_rep.pass);
  CHECK(log_rep.log_slack == doctest::Approx(4096 + std::log(65792.0) - 4 * std::log(1e300)).epsilon(1e-3));
  // with a = 0 the bound is finite and the log comparison is not needed
  const CirParams<double> flat(1, 1, 0, 1, h);
  CHECK_FALSE(check_moment_bound(huge, fbm, moment_bound_constants(flat, 1.0, 4.0)).pass);

  const CirParams<double> half(1, 1, 1, 1, h, Convention::half);
  const auto half_path = simulate_eps_path(half, Epsilon<double>(0.01), fbm, DriftKind::indicator);
  CHECK_THROWS_AS(check_moment_bound(half_path, fbm, moment_bound_constants(half, 1.0, 1.0)), DomainError);
}

TEST_CASE("explicit transform without drift is the shifted noise") {
  const HurstIndex<double> h(0.3);
  const auto fbm = sample_fbm_circulant(Grid<double>(1.0, 2000), h, 4);
  const CirParams<double> p(3.0, 0, 0, 0.7, h);
  const Vector<double> y = (3.0 + 0.7 * fbm.values.array()).matrix();
  const auto z = explicit_transform(y, fbm, p, 2000, 1e-8);
  CHECK((z - y).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(relative_sup_gap(y, z) < 1e-12);
}

TEST_CASE("explicit transform reproduces a positive Euler path") {
  const HurstIndex<double> h(0.4);
  const auto fbm = sample_fbm_circulant(Grid<double>(1.0, 20000), h, 6);
  const CirParams<double> p(3.0, 1.0, 1.0, 0.3, h);
  const auto path = simulate_eps_path(p, Epsilon<double>(0.01), fbm, DriftKind::indicator);
  REQUIRE(path.values.minCoeff() > 0.5);
  const auto z = explicit_transform(path.values, fbm, p, 20000, 1e-8);
  CHECK(relative_sup_gap(path.values, z) < 1e-2);
}

TEST_CASE("explicit transform preconditions") {
  const HurstIndex<double> h(0.3);
  const Grid<double> grid(1.0, 4);
  const FbmPath<double> fbm{grid, h, 0, Vector<double>::Zero(5)};
  Vector<double> y(5);
  y << 1, 0.5, 0.0, 0.5, 1;
  const CirParams<double> p(1, 1, 1, 1, h);
  CHECK(first_hit(y, 1e-8) == Eigen::Index(2));
  CHECK_FALSE(first_hit(Vector<double>(Vector<double>::Ones(3)), 0.0).has_value());
  CHECK_NOTHROW(explicit_transform(y, fbm, p, 1, 1e-8));
  try {
    explicit_transform(y, fbm, p, 3, 1e-8);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("node 2") != std::string::npos);
  }
  const CirParams<double> half(1, 1, 1, 1, h, Convention::half);
  CHECK_THROWS_AS(explicit_transform(y, fbm, half, 1, 1e-8), DomainError);
}

TEST_CASE("coincidence of the two drift approximations") {
  const HurstIndex<double> h(0.3);
  const CirParams<double> p(1, 1, 1, 1, h);
  const auto fbm = sample_fbm_circulant(Grid<double>(5.0, 50000), h, 2);
  const auto rep = coincidence_study(p, fbm, Epsilon<double>(0.01));
  CHECK(rep.bound == 0.02);
  CHECK(rep.pass);
  CHECK(rep.min_diff >= 0.0);
  CHECK(rep.sup_diff < rep.bound);
}
