#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "twinmodel/errors.hpp"
#include "twinmodel/field.hpp"
#include "twinmodel/grid.hpp"

using namespace twin;

TEST_CASE("grid invariants") {
  Grid1D g = Grid1D::uniform(10, 10, 1.0, 1.0);
  CHECK(g.n_cells() == 10);
  CHECK(g.n_time() == 10);
  CHECK(g.length() == doctest::Approx(1.0));
  CHECK(g.horizon() == doctest::Approx(1.0));
  double wsum = 0.0, xsum = 0.0;
  for (int k = 0; k < g.n_time(); ++k) wsum += g.t_weight(k);
  for (int i = 0; i < g.n_cells(); ++i) xsum += g.x_width(i);
  CHECK(wsum == doctest::Approx(1.0));
  CHECK(xsum == doctest::Approx(1.0));
  CHECK(g.t_point(0) == 0.0);
  CHECK(g.t_point(9) == doctest::Approx(1.0));

  CHECK_THROWS_AS(Grid1D({1.0, 0.5}, {0.1, 0.1}, {}, {}, true), argument_error);
  CHECK_THROWS_AS(Grid1D({0.5}, {-0.1}, {}, {}, true), argument_error);
  CHECK_THROWS_AS(Grid1D({0.5}, {1.0}, {0.0, 1.0}, {0.4, 0.4}, true), argument_error);
}

TEST_CASE("mismatch_spacetime examples") {
  auto grid = make_grid(Grid1D::uniform(10, 10, 1.0, 1.0));
  SpaceTimeField a(grid);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& v : a.values()) v = dist(rng);

  SUBCASE("identity") { CHECK(mismatch_spacetime(a, a) == 0.0); }

  SUBCASE("constant offset gives delta^2") {
    const double delta = 0.37;
    SpaceTimeField b = a;
    for (double& v : b.values()) v += delta;
    CHECK(mismatch_spacetime(a, b) == doctest::Approx(delta * delta).epsilon(1e-12));
  }

  SUBCASE("single differing entry") {
    const double delta = 0.5;
    SpaceTimeField b = a;
    b.at(3, 7) += delta;
    CHECK(mismatch_spacetime(a, b) == doctest::Approx(0.01 * delta * delta).epsilon(1e-12));
  }

  SUBCASE("symmetry, nonnegativity, quadratic scaling") {
    SpaceTimeField b = a;
    for (double& v : b.values()) v += 0.11;
    CHECK(mismatch_spacetime(a, b) == mismatch_spacetime(b, a));
    CHECK(mismatch_spacetime(a, b) >= 0.0);
    SpaceTimeField c = a;
    for (double& v : c.values()) v += 0.22;
    CHECK(mismatch_spacetime(a, c) ==
          doctest::Approx(4.0 * mismatch_spacetime(a, b)).epsilon(1e-12));
  }

  SUBCASE("grid mismatch is a structural error") {
    auto other = make_grid(Grid1D::uniform(10, 12, 1.0, 1.0));
    SpaceTimeField b(other);
    CHECK_THROWS_AS(mismatch_spacetime(a, b), grid_mismatch_error);
  }
}

TEST_CASE("mismatch_steady_weighted examples") {
  auto grid = make_grid(Grid1D::spatial(4, 1.0));
  SteadyField base(grid);
  // constant differences 2 and 3 give cell-width-weighted squared norms 4 and 9
  SteadyField t0(grid), t1(grid);
  for (int i = 0; i < 4; ++i) {
    t0.at(i) = base.at(i) + 2.0;
    t1.at(i) = base.at(i) + 3.0;
  }
  std::vector<SteadyField> twin{t0, t1}, gray{base, base};

  SUBCASE("identity") {
    const double w[2] = {1.0, 1.0};
    CHECK(mismatch_steady_weighted(std::span<const SteadyField>(gray),
                                   std::span<const SteadyField>(gray), w) == 0.0);
  }
  SUBCASE("unit weights") {
    const double w[2] = {1.0, 1.0};
    CHECK(mismatch_steady_weighted(std::span<const SteadyField>(twin),
                                   std::span<const SteadyField>(gray), w) ==
          doctest::Approx(13.0).epsilon(1e-12));
  }
  SUBCASE("scaled weights") {
    const double w[2] = {2.0, 0.5};
    CHECK(mismatch_steady_weighted(std::span<const SteadyField>(twin),
                                   std::span<const SteadyField>(gray), w) ==
          doctest::Approx(12.5).epsilon(1e-12));
  }
  SUBCASE("non-positive weight rejected") {
    const double w[2] = {1.0, 0.0};
    CHECK_THROWS_AS(mismatch_steady_weighted(std::span<const SteadyField>(twin),
                                             std::span<const SteadyField>(gray), w),
                    argument_error);
  }
}

TEST_CASE("excited_range") {
  auto grid = make_grid(Grid1D::uniform(3, 2, 1.0, 1.0));
  SpaceTimeField u(grid);

  SUBCASE("constant field") {
    for (double& v : u.values()) v = 0.3;
    const Interval r = excited_range(u);
    CHECK(r.lo == 0.3);
    CHECK(r.hi == 0.3);
  }
  SUBCASE("three values") {
    u.values() = {0.5, 0.1, 0.9, 0.5, 0.1, 0.9};
    const Interval r = excited_range(u);
    CHECK(r.lo == 0.1);
    CHECK(r.hi == 0.9);
  }
}

TEST_CASE("field csv round trip") {
  auto grid = make_grid(Grid1D::uniform(7, 5, 1.0, 0.8));
  SpaceTimeField f(grid);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (double& v : f.values()) v = dist(rng);

  const std::string path = std::filesystem::temp_directory_path() / "twin_field_rt.csv";
  write_field_csv(f, path);
  SpaceTimeField g = read_field_csv(path);
  REQUIRE(g.grid().n_cells() == 7);
  REQUIRE(g.grid().n_time() == 5);
  for (std::size_t i = 0; i < f.values().size(); ++i) CHECK(g.values()[i] == f.values()[i]);
  for (int i = 0; i < 7; ++i)
    CHECK(g.grid().x_center(i) == doctest::Approx(f.grid().x_center(i)).epsilon(1e-14));
  std::filesystem::remove(path);
}
