#include <doctest.h>

#include <cmath>
#include <limits>

#include "twinmodel/lbfgs.hpp"

using namespace twin;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

BoundObjective quadratic(std::vector<double> center) {
  return [center](std::span<const double> x, double& f, std::span<double> g) {
    f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - center[i];
      f += (i + 1) * d * d;
      g[i] = 2.0 * (i + 1) * d;
    }
    return true;
  };
}
}  // namespace

TEST_CASE("unconstrained quadratic converges to the center") {
  std::vector<double> lo(3, -kInf), hi(3, kInf);
  LbfgsResult r = minimize_bounded(quadratic({1.0, -2.0, 0.5}), {0.0, 0.0, 0.0}, lo, hi, {});
  CHECK(r.status == LbfgsStatus::converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-7));
  CHECK(r.x[2] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("bound-constrained quadratic stops at the active bound") {
  std::vector<double> lo{0.0, 0.0}, hi{kInf, kInf};
  LbfgsResult r = minimize_bounded(quadratic({-3.0, 2.0}), {1.0, 1.0}, lo, hi, {});
  CHECK(r.status == LbfgsStatus::converged);
  CHECK(r.x[0] == doctest::Approx(0.0));  // clamped; projected gradient vanishes there
  CHECK(r.x[1] == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("rosenbrock inside a box") {
  auto rosen = [](std::span<const double> x, double& f, std::span<double> g) {
    const double a = 1.0, b = 100.0;
    f = (a - x[0]) * (a - x[0]) + b * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]);
    g[0] = -2.0 * (a - x[0]) - 4.0 * b * x[0] * (x[1] - x[0] * x[0]);
    g[1] = 2.0 * b * (x[1] - x[0] * x[0]);
    return true;
  };
  std::vector<double> lo{-10.0, -10.0}, hi{10.0, 10.0};
  LbfgsOptions opt;
  opt.max_iters = 500;
  LbfgsResult r = minimize_bounded(rosen, {-1.2, 1.0}, lo, hi, opt);
  CHECK(r.status == LbfgsStatus::converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("objective is monotone along accepted steps") {
  std::vector<double> lo(4, 0.0), hi(4, kInf);
  LbfgsResult r =
      minimize_bounded(quadratic({2.0, 3.0, -1.0, 0.25}), {5.0, 5.0, 5.0, 5.0}, lo, hi, {});
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    CHECK(r.trace[i].f <= r.trace[i - 1].f);
}

TEST_CASE("converged start terminates immediately") {
  std::vector<double> lo(2, -kInf), hi(2, kInf);
  LbfgsResult r = minimize_bounded(quadratic({1.0, 1.0}), {1.0, 1.0}, lo, hi, {});
  CHECK(r.status == LbfgsStatus::converged);
  CHECK(r.iterations <= 2);
}

TEST_CASE("evaluation failures reject the step and report best-so-far") {
  int calls = 0;
  auto flaky = [&calls](std::span<const double> x, double& f, std::span<double> g) {
    ++calls;
    if (calls > 1) return false;  // every step evaluation fails
    f = x[0] * x[0];
    g[0] = 2.0 * x[0];
    return true;
  };
  std::vector<double> lo{-kInf}, hi{kInf};
  LbfgsResult r = minimize_bounded(flaky, {3.0}, lo, hi, {});
  CHECK(r.status == LbfgsStatus::line_search_failed);
  CHECK(r.x[0] == 3.0);
  CHECK(r.f == 9.0);
}
