#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <random>

#include "test_support.hpp"
#include "twinmodel/eos.hpp"
#include "twinmodel/errors.hpp"

using namespace twin;

TEST_CASE("reference eos values") {
  SUBCASE("ideal gas") {
    ReferenceEos ig = ReferenceEos::ideal(1.4);
    CHECK(ig.pressure(3.0, 10.0) == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("vdW and RK reduce to ideal at vanishing density") {
    ReferenceEos ig = ReferenceEos::ideal(1.4);
    ReferenceEos vdw = ReferenceEos::van_der_waals(1e4, 0.1);
    ReferenceEos rk = ReferenceEos::redlich_kwong(1e7, 0.1);
    const double u = 2.5e5;
    const double rho = 1e-8;
    CHECK(std::abs(vdw.pressure(rho, u) - ig.pressure(rho, u)) < 1e-6 * ig.pressure(rho, u));
    CHECK(std::abs(rk.pressure(rho, u) - ig.pressure(rho, u)) < 1e-6 * ig.pressure(rho, u));
  }
  SUBCASE("domain errors") {
    ReferenceEos vdw = ReferenceEos::van_der_waals(1e4, 0.1);
    CHECK_THROWS_AS(vdw.pressure(10.0, 1e5), domain_error);  // b rho = 1
    ReferenceEos rk = ReferenceEos::redlich_kwong(1e7, 0.1);
    CHECK_THROWS_AS(rk.pressure(1.0, 0.0), domain_error);
    CHECK_THROWS_AS(rk.pressure(1.0, -5.0), domain_error);
  }
  SUBCASE("gamma must exceed one") {
    CHECK_THROWS_AS(ReferenceEos::ideal(1.0), argument_error);
  }
}

TEST_CASE("reference eos partials match finite differences") {
  ReferenceEos vdw = ReferenceEos::van_der_waals(1e4, 0.1);
  ReferenceEos rk = ReferenceEos::redlich_kwong(1e7, 0.1);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> rho_d(0.5, 1.5), u_d(1e5, 4e5);
  for (const StateEquation* eos :
       {static_cast<const StateEquation*>(&vdw), static_cast<const StateEquation*>(&rk)}) {
    for (int t = 0; t < 20; ++t) {
      const double rho = rho_d(rng), u = u_d(rng);
      const EosEval e = eos->evaluate(rho, u);
      const double hr = 1e-6 * rho, hu = 1e-6 * u;
      const double fd_r = (eos->pressure(rho + hr, u) - eos->pressure(rho - hr, u)) / (2 * hr);
      const double fd_u = (eos->pressure(rho, u + hu) - eos->pressure(rho, u - hu)) / (2 * hu);
      CHECK(e.dp_drho == doctest::Approx(fd_r).epsilon(1e-6));
      CHECK(e.dp_dU == doctest::Approx(fd_u).epsilon(1e-6));
    }
  }
}

TEST_CASE("parameterized eos") {
  SUBCASE("all-zero alpha gives the constant offset") {
    ParamEos eos({1.0, 2.0}, {1e5, 2e5}, 0.5, 5e4, std::vector<double>(4, 0.0), 7.5);
    const EosEval e = eos.evaluate(1.3, 1.4e5);
    CHECK(e.p == 7.5);
    CHECK(e.dp_dU == 0.0);
    CHECK(e.dp_drho == 0.0);
  }
  SUBCASE("monotone in U for nonnegative alpha") {
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> a_d(0.0, 5e4), rho_d(0.5, 2.5), u_d(5e4, 5e5);
    for (int t = 0; t < 10; ++t) {
      std::vector<double> alpha(9);
      for (double& a : alpha) a = a_d(rng);
      ParamEos eos({1.0, 1.5, 2.0}, {1e5, 2e5, 3e5}, 0.4, 6e4, alpha, 100.0);
      for (int s = 0; s < 30; ++s) CHECK(eos.evaluate(rho_d(rng), u_d(rng)).dp_dU >= 0.0);
    }
  }
  SUBCASE("analytic partials match finite differences") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> a_d(0.0, 5e4), rho_d(0.8, 2.2), u_d(1.1e5, 2.9e5);
    std::vector<double> alpha(16);
    for (double& a : alpha) a = a_d(rng);
    ParamEos eos({0.9, 1.3, 1.7, 2.1}, {1e5, 1.7e5, 2.4e5, 3.1e5}, 0.3, 5.25e4, alpha, 2e3);
    for (int t = 0; t < 25; ++t) {
      const double rho = rho_d(rng), u = u_d(rng);
      const EosEval e = eos.evaluate(rho, u);
      const double hr = 1e-6 * rho, hu = 1e-6 * u;
      const double fd_r = (eos.pressure(rho + hr, u) - eos.pressure(rho - hr, u)) / (2 * hr);
      const double fd_u = (eos.pressure(rho, u + hu) - eos.pressure(rho, u - hu)) / (2 * hu);
      CHECK(e.dp_drho == doctest::Approx(fd_r).epsilon(2e-6));
      CHECK(e.dp_dU == doctest::Approx(fd_u).epsilon(2e-6));
    }
  }
  SUBCASE("negative alpha rejected") {
    CHECK_THROWS_AS(ParamEos({1.0}, {1e5}, 0.5, 5e4, {-1.0}, 0.0), argument_error);
  }
}

TEST_CASE("build_param_eos center placement") {
  SUBCASE("four centers on [1,2]") {
    std::vector<double> rho{1.0, 1.4, 2.0, 1.7};
    std::vector<double> u{1e5, 3e5, 2e5};
    ParamEos eos = build_param_eos(rho, u, 4, 3);
    REQUIRE(eos.n_rho() == 4);
    CHECK(eos.rho_centers()[0] == doctest::Approx(1.0));
    CHECK(eos.rho_centers()[1] == doctest::Approx(4.0 / 3.0));
    CHECK(eos.rho_centers()[2] == doctest::Approx(5.0 / 3.0));
    CHECK(eos.rho_centers()[3] == doctest::Approx(2.0));
    CHECK(eos.sigma_rho() == doctest::Approx(0.25));
  }
  SUBCASE("degenerate range") {
    std::vector<double> rho{1.0, 2.0};
    std::vector<double> u{5.0, 5.0};
    CHECK_THROWS_AS(build_param_eos(rho, u, 4, 4), degenerate_range_error);
  }
  SUBCASE("single center at the midpoint with full-range width") {
    std::vector<double> rho{1.0, 2.0};
    std::vector<double> u{1e5, 3e5};
    ParamEos eos = build_param_eos(rho, u, 1, 1);
    CHECK(eos.rho_centers()[0] == doctest::Approx(1.5));
    CHECK(eos.sigma_rho() == doctest::Approx(1.0));
    CHECK(eos.u_centers()[0] == doctest::Approx(2e5));
    CHECK(eos.sigma_u() == doctest::Approx(2e5));
  }
}

TEST_CASE("convex hull") {
  SUBCASE("triangle contains its centroid") {
    std::array<std::array<double, 2>, 3> pts{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
    StateHull h = convex_hull(pts);
    CHECK(!h.degenerate);
    CHECK(h.vertices.size() == 3);
    CHECK(h.contains(1.0 / 3.0, 1.0 / 3.0));
  }
  SUBCASE("point outside the bounding box is excluded") {
    std::array<std::array<double, 2>, 4> pts{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    StateHull h = convex_hull(pts);
    CHECK(!h.contains(2.0, 0.5));
    CHECK(h.contains(1.0, 1.0));  // boundary inclusive
  }
  SUBCASE("matches the brute-force hull on random points") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<std::array<double, 2>> pts(100);
    for (auto& p : pts) p = {d(rng), d(rng)};
    StateHull h = convex_hull(pts);

    // O(n^3) oracle: a point is a hull vertex iff it lies on an edge (i,j)
    // having all points on one side, and is one of its endpoints
    auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
      return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<std::array<double, 2>> brute;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bool vertex = false;
      for (std::size_t j = 0; j < pts.size() && !vertex; ++j) {
        if (i == j) continue;
        bool all_left = true, all_right = true;
        for (std::size_t k = 0; k < pts.size(); ++k) {
          if (k == i || k == j) continue;
          const double c = cross(pts[i], pts[j], pts[k]);
          all_left = all_left && c >= 0.0;
          all_right = all_right && c <= 0.0;
        }
        vertex = all_left || all_right;
      }
      if (vertex) brute.push_back(pts[i]);
    }
    REQUIRE(h.vertices.size() == brute.size());
    std::sort(brute.begin(), brute.end());
    auto sorted = h.vertices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == brute);
  }
  SUBCASE("collinear cloud is flagged degenerate") {
    std::array<std::array<double, 2>, 3> pts{{{0, 0}, {1, 1}, {2, 2}}};
    StateHull h = convex_hull(pts);
    CHECK(h.degenerate);
    CHECK(h.contains(0.5, 0.5));
    CHECK(!h.contains(0.5, 0.6));
  }
}

TEST_CASE("param eos json round trip and hull json") {
  std::vector<double> alpha{0.0, 1.5, 2.25, 0.125};
  ParamEos eos({1.0, 2.0}, {1e5, 2e5}, 0.5, 5e4, alpha, 321.0);
  auto dir = std::filesystem::temp_directory_path();
  save_param_eos(eos, (dir / "twin_eos_rt.json").string());
  ParamEos back = load_param_eos((dir / "twin_eos_rt.json").string());
  CHECK(back.alpha() == eos.alpha());
  CHECK(back.p0() == eos.p0());
  CHECK(back.rho_centers() == eos.rho_centers());
  CHECK(back.sigma_u() == eos.sigma_u());
  std::filesystem::remove(dir / "twin_eos_rt.json");

  StateHull h = convex_hull(std::array<std::array<double, 2>, 3>{{{0, 0}, {1, 0}, {0, 1}}});
  save_hull(h, (dir / "twin_hull.json").string());
  CHECK(std::filesystem::exists(dir / "twin_hull.json"));
  std::filesystem::remove(dir / "twin_hull.json");
}

TEST_CASE("internal energy inversion") {
  ReferenceEos ig = ReferenceEos::ideal(1.4);
  const double u = invert_internal_energy(ig, 1.0, 1e5, 1e4);
  CHECK(u == doctest::Approx(2.5e5).epsilon(1e-12));
  ReferenceEos rk = ReferenceEos::redlich_kwong(1e7, 0.1);
  const double u2 = invert_internal_energy(rk, 1.0, 1e5, 2.5e5);
  CHECK(rk.pressure(1.0, u2) == doctest::Approx(1e5).epsilon(1e-12));
}
