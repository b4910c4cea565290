#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "test_support.hpp"
#include "twinmodel/errors.hpp"
#include "twinmodel/flux.hpp"

using namespace twin;

TEST_CASE("buckley-leverett flux values") {
  BuckleyLeverettFlux bl(2.0);
  CHECK(bl.value(0.0) == 0.0);
  CHECK(bl.value(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bl.value(0.5) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("flux value and derivative pairs") {
  SUBCASE("twin flux with zero coefficients") {
    TwinFlux twin(SigmoidFluxBasis::equispaced(5, 0.0, 1.0), std::vector<double>(5, 0.0));
    CHECK(twin.value(0.3) == 0.0);
    CHECK(twin.slope(0.3) == 0.0);
  }
  SUBCASE("A=0 reduces to u^2") {
    BuckleyLeverettFlux bl(0.0);
    CHECK(bl.value(0.5) == doctest::Approx(0.25));
    CHECK(bl.slope(0.5) == doctest::Approx(1.0));
  }
  SUBCASE("A=2 analytic slope at u=0.5") {
    BuckleyLeverettFlux bl(2.0);
    CHECK(bl.slope(0.5) == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
  }
}

TEST_CASE("sigmoid basis evaluation") {
  SigmoidFluxBasis basis({0.0}, 1.0);
  SUBCASE("half at the center") { CHECK(basis.eval_one(0, 0.0) == doctest::Approx(0.5)); }
  SUBCASE("tanh limits") {
    CHECK(basis.eval_one(0, 60.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(basis.eval_one(0, -60.0) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("frozen tanh oracle at u=1") {
    // (tanh(1)+1)/2 computed independently via std::tanh
    CHECK(basis.eval_one(0, 1.0) == doctest::Approx(0.8807970779778824).epsilon(1e-15));
  }
  SUBCASE("components strictly increasing") {
    SigmoidFluxBasis b = SigmoidFluxBasis::equispaced(6, -0.1, 1.1);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-0.5, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
      double u1 = dist(rng), u2 = dist(rng);
      if (u1 > u2) std::swap(u1, u2);
      if (u1 == u2) continue;
      for (int k = 0; k < b.size(); ++k) CHECK(b.eval_one(k, u1) < b.eval_one(k, u2));
    }
  }
}

TEST_CASE("analytic derivatives match central differences") {
  BuckleyLeverettFlux bl(2.0);
  SigmoidFluxBasis basis = SigmoidFluxBasis::equispaced(20, -0.1, 1.1);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> coeff(0.0, 1.0), point(-0.2, 1.2);
  std::vector<double> xi(20);
  for (double& x : xi) x = coeff(rng);
  TwinFlux twin(basis, xi);

  for (int trial = 0; trial < 40; ++trial) {
    const double u = point(rng);
    const double h = 1e-6 * std::max(1.0, std::abs(u));
    for (const FluxModel* m : {static_cast<const FluxModel*>(&bl),
                               static_cast<const FluxModel*>(&twin)}) {
      const double fd1 = (m->value(u + h) - m->value(u - h)) / (2 * h);
      const double fd2 = (m->slope(u + h) - m->slope(u - h)) / (2 * h);
      CHECK(m->slope(u) == doctest::Approx(fd1).epsilon(1e-6));
      CHECK(m->curvature(u) == doctest::Approx(fd2).epsilon(1e-5));
    }
  }
}

TEST_CASE("twin flux slope nonnegative for nonnegative coefficients") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> coeff(0.0, 2.0), point(-1.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xi(8);
    for (double& x : xi) x = coeff(rng);
    TwinFlux twin(SigmoidFluxBasis::equispaced(8, -0.1, 1.1), xi);
    for (int s = 0; s < 20; ++s) CHECK(twin.slope(point(rng)) >= 0.0);
  }
}

TEST_CASE("constant flux offset leaves the slope unchanged") {
  BuckleyLeverettFlux bl(2.0);
  testing::OffsetFlux shifted(bl, 3.7);
  for (double u : {0.0, 0.25, 0.5, 0.99}) {
    CHECK(shifted.slope(u) == bl.slope(u));
    CHECK(shifted.value(u) == doctest::Approx(bl.value(u) + 3.7));
  }
}

TEST_CASE("twin flux validation and json round trip") {
  SigmoidFluxBasis basis = SigmoidFluxBasis::equispaced(4, 0.0, 1.0);
  CHECK_THROWS_AS(TwinFlux(basis, {1.0, -0.1, 0.2, 0.0}), argument_error);
  CHECK_THROWS_AS(SigmoidFluxBasis({0.2, 0.1}, 0.5), argument_error);
  CHECK_THROWS_AS(SigmoidFluxBasis({0.1, 0.2}, 0.0), argument_error);

  TwinFlux twin(basis, {0.5, 0.0, 1.25, 0.125});
  const std::string path = std::filesystem::temp_directory_path() / "twin_flux_rt.json";
  save_twin_flux(twin, path);
  TwinFlux back = load_twin_flux(path);
  CHECK(back.coefficients() == twin.coefficients());
  CHECK(back.basis().centers() == twin.basis().centers());
  CHECK(back.basis().width() == twin.basis().width());
  std::filesystem::remove(path);
}
