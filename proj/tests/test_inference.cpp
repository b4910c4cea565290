#include <doctest.h>

#include <array>
#include <cmath>
#include <memory>
#include <random>

#include "test_support.hpp"
#include "twinmodel/errors.hpp"
#include "twinmodel/inference.hpp"
#include "twinmodel/scenarios.hpp"

using namespace twin;

namespace {

struct FluxFixture {
  GridPtr grid;
  SpaceTimeField gray;
  ControlField control;
  SigmoidFluxBasis basis;
  std::vector<double> xi_star;
  SolverConfig solver;

  static FluxFixture make(int n, double newton_tol = 1e-12) {
    SigmoidFluxBasis basis = SigmoidFluxBasis::equispaced(8, -0.1, 1.1);
    std::vector<double> xi_star(8);
    for (int k = 0; k < 8; ++k) xi_star[k] = 0.05 + 0.03 * k;
    auto grid = make_grid(Grid1D::uniform(n, n, 1.0, 1.0));
    InitialConditionSpec ic;
    ic.family = InitialConditionSpec::Family::gaussian;
    ic.base = 0.2;
    ic.amplitude = 0.6;
    ic.center = 0.513;
    ic.width = 0.12;
    SolverConfig cfg;
    cfg.newton_tol = newton_tol;
    ControlField control(grid);
    RunRecord run = solve_spacetime(make_initial_condition(ic, *grid),
                                    std::make_shared<TwinFlux>(basis, xi_star), control, grid,
                                    cfg);
    return FluxFixture{grid, run.solution, control, basis, xi_star, cfg};
  }
};

}  // namespace

TEST_CASE("training objective at the generating coefficients") {
  FluxFixture fx = FluxFixture::make(32);
  FluxTrainingObjective obj(fx.gray, fx.control, fx.solver, fx.basis, 0.0);
  double value = 0.0;
  std::vector<double> grad(8);
  REQUIRE(obj(fx.xi_star, value, grad));
  CHECK(value == 0.0);  // bit-identical forward reproduction
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("training gradient matches finite differences") {
  FluxFixture fx = FluxFixture::make(32, 1e-13);
  const double lambda = 1e-5;
  FluxTrainingObjective obj(fx.gray, fx.control, fx.solver, fx.basis, lambda);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> jitter(0.8, 1.25);
  std::vector<double> xi(8);
  for (int k = 0; k < 8; ++k) xi[k] = fx.xi_star[k] * jitter(rng);

  double value = 0.0;
  std::vector<double> grad(8);
  REQUIRE(obj(xi, value, grad));
  std::vector<double> fd(8);
  for (int j = 0; j < 8; ++j) {
    const double h = 1e-6 * std::max(1.0, xi[j]);
    auto xp = xi, xm = xi;
    xp[j] += h;
    xm[j] -= h;
    double vp, vm;
    std::vector<double> dump(8);
    REQUIRE(obj(xp, vp, dump));
    REQUIRE(obj(xm, vm, dump));
    fd[j] = (vp - vm) / (2 * h);
  }
  CHECK(testing::rel_l2(grad, fd) < 1e-5);
}

TEST_CASE("self-consistency recovery on a known twin") {
  FluxFixture fx = FluxFixture::make(48);
  std::vector<double> start(8);
  for (int k = 0; k < 8; ++k)
    start[k] = std::max(fx.xi_star[k] * (1.0 + 0.3 * std::sin(3.0 * k + 1.0)), 0.01);

  InferenceProblem problem;
  problem.lambda = 1e-8;
  problem.optimizer.max_iters = 400;
  FluxTrainingResult res =
      train_flux(fx.gray, fx.control, fx.solver, fx.basis, problem, start);

  TwinFlux truth(fx.basis, fx.xi_star);
  const Interval excited = excited_range(fx.gray);
  RecoveryReport rep =
      flux_recovery_report(res.model, truth, excited, Interval{-0.1, 1.1});
  CHECK(rep.in_sup < 1e-2);
  CHECK(res.mismatch < 1e-9);
}

TEST_CASE("training from the generating coefficients terminates immediately") {
  FluxFixture fx = FluxFixture::make(24);
  InferenceProblem problem;  // lambda 0
  FluxTrainingResult res =
      train_flux(fx.gray, fx.control, fx.solver, fx.basis, problem, fx.xi_star);
  CHECK(res.iterations <= 2);
  CHECK(res.status == LbfgsStatus::converged);
}

TEST_CASE("training is deterministic") {
  FluxFixture fx = FluxFixture::make(24);
  std::vector<double> start(8, 0.1);
  InferenceProblem problem;
  problem.lambda = 1e-7;
  problem.optimizer.max_iters = 40;
  FluxTrainingResult a = train_flux(fx.gray, fx.control, fx.solver, fx.basis, problem, start);
  FluxTrainingResult b = train_flux(fx.gray, fx.control, fx.solver, fx.basis, problem, start);
  CHECK(a.model.coefficients() == b.model.coefficients());
}

TEST_CASE("lasso sweep: coefficient mass non-increasing in lambda") {
  FluxFixture fx = FluxFixture::make(40);
  std::vector<double> start = initial_flux_guess(fx.gray, fx.basis);
  FluxTrainingObjective probe(fx.gray, fx.control, fx.solver, fx.basis, 0.0);
  const double lambda0 = relative_lambda(probe, start, 1e-4);

  double prev_sum = std::numeric_limits<double>::infinity();
  std::vector<double> xi = start;
  for (int s = 0; s < 3; ++s) {
    InferenceProblem problem;
    problem.lambda = lambda0 * std::pow(10.0, s);
    problem.optimizer.max_iters = 250;
    FluxTrainingResult res = train_flux(fx.gray, fx.control, fx.solver, fx.basis, problem, xi);
    double sum = 0.0;
    for (double v : res.model.coefficients()) sum += v;
    CHECK(sum <= prev_sum * (1.0 + 1e-9));
    prev_sum = sum;
    xi = res.model.coefficients();  // warm-start the next lambda
  }
}

TEST_CASE("relative lambda scales with the initial mismatch") {
  FluxFixture fx = FluxFixture::make(24);
  FluxTrainingObjective obj(fx.gray, fx.control, fx.solver, fx.basis, 0.0);
  std::vector<double> xi(8, 0.05);
  const auto m0 = obj.mismatch(xi);
  REQUIRE(m0.has_value());
  CHECK(relative_lambda(obj, xi) == doctest::Approx(1e-6 * *m0));
}

TEST_CASE("weight calibration arithmetic") {
  SUBCASE("reciprocal of the sample mean") {
    const double r[2] = {1.0, 3.0}, u[2] = {2.0, 2.0}, e[2] = {4.0, 4.0};
    WeightSet w = weights_from_samples(r, u, e);
    CHECK(w.w_rho == doctest::Approx(0.5));
    CHECK(w.w_u == doctest::Approx(0.5));
    CHECK(w.w_E == doctest::Approx(0.25));
  }
  SUBCASE("degenerate guard") {
    const double z[2] = {0.0, 0.0}, u[2] = {1.0, 1.0};
    CHECK_THROWS_AS(weights_from_samples(z, u, u), calibration_error);
    CHECK_THROWS_AS(weights_from_samples({}, {}, {}), calibration_error);
  }
}

TEST_CASE("flux recovery report") {
  BuckleyLeverettFlux truth(2.0);
  SUBCASE("identical models have zero errors") {
    BuckleyLeverettFlux same(2.0);
    RecoveryReport rep =
        flux_recovery_report(same, truth, Interval{0.2, 0.8}, Interval{0.0, 1.0});
    CHECK(rep.in_rel_l2 == 0.0);
    CHECK(rep.in_sup == 0.0);
    CHECK(rep.out_rel_l2 == 0.0);
  }
  SUBCASE("comparison is shift-invariant") {
    testing::OffsetFlux shifted(truth, 12.5);
    RecoveryReport a =
        flux_recovery_report(shifted, truth, Interval{0.2, 0.8}, Interval{0.0, 1.0});
    CHECK(a.in_rel_l2 == 0.0);
    CHECK(a.out_sup == 0.0);
  }
}

TEST_CASE("steady eos inference pieces") {
  auto grid = make_grid(Grid1D::spatial(40, 1.0));
  NozzleSetup setup{
      BsplineArea({{0.0, 1.0}, {0.2, 0.9}, {0.4, 0.8}, {0.6, 0.8}, {0.8, 0.9}, {1.0, 1.0}}),
      FlowBc{}, grid, NozzleConfig{}};
  ReferenceEos ig = ReferenceEos::ideal(1.4);
  SteadyResult gray = solve_steady(ig, setup.area, setup.bc, grid, setup.config);
  auto gray_fields = gray.state.to_fields();

  std::vector<std::array<double, 2>> cloud(40);
  std::vector<double> rho_cloud(40), u_cloud(40);
  for (int i = 0; i < 40; ++i) {
    cloud[i] = gray.state.state_point(i);
    rho_cloud[i] = cloud[i][0];
    u_cloud[i] = cloud[i][1];
  }
  ParamEos skeleton = build_param_eos(rho_cloud, u_cloud, 6, 6);

  SUBCASE("initial guess tracks the ideal surface over the cloud") {
    ParamEos guess = initial_eos_guess(skeleton, cloud);
    double max_rel = 0.0;
    for (const auto& [rho, u] : cloud)
      max_rel = std::max(max_rel,
                         std::abs(guess.pressure(rho, u) - ig.pressure(rho, u)) /
                             ig.pressure(rho, u));
    CHECK(max_rel < 0.05);
  }

  SUBCASE("calibration is deterministic and positive") {
    WeightSet w1 = calibrate_weights(gray_fields, skeleton, setup, 3, 1234);
    WeightSet w2 = calibrate_weights(gray_fields, skeleton, setup, 3, 1234);
    CHECK(w1.w_rho == w2.w_rho);
    CHECK(w1.w_u == w2.w_u);
    CHECK(w1.w_E == w2.w_E);
    CHECK(w1.w_rho > 0.0);
  }

  SUBCASE("eos training objective gradient matches finite differences") {
    NozzleSetup tight = setup;
    tight.config.steady_tol = 1e-12;
    ParamEos start = initial_eos_guess(skeleton, cloud);
    WeightSet weights{1.0, 1.0, 1.0};
    EosTrainingObjective obj(gray_fields, start, tight, weights, 1e-10, &gray.state);

    std::vector<double> params = start.packed_params();
    const int np = static_cast<int>(params.size());
    double value = 0.0;
    std::vector<double> grad(np);
    REQUIRE(obj(params, value, grad));

    std::vector<double> fd_sel, adj_sel;
    for (int j : {0, 7, 14, 21, 28, 35, np - 1}) {
      const double h = 1e-5 * std::max(1.0, std::abs(params[j]));
      auto pp = params, pm = params;
      pp[j] += h;
      pm[j] -= h;
      double vp, vm;
      std::vector<double> dump(np);
      REQUIRE(obj(pp, vp, dump));
      REQUIRE(obj(pm, vm, dump));
      fd_sel.push_back((vp - vm) / (2 * h));
      adj_sel.push_back(grad[j]);
    }
    CHECK(testing::rel_l2(adj_sel, fd_sel) < 1e-4);
  }

  SUBCASE("a short training run reduces the mismatch") {
    WeightSet weights = calibrate_weights(gray_fields, skeleton, setup, 3, 99);
    ParamEos start = initial_eos_guess(skeleton, cloud);
    EosTrainingObjective probe(gray_fields, start, setup, weights, 0.0, &gray.state);
    double m0 = 0.0;
    std::vector<double> dump(start.num_params());
    REQUIRE(probe(start.packed_params(), m0, dump));

    InferenceProblem problem;
    problem.lambda = 0.0;
    problem.optimizer.max_iters = 40;
    EosTrainingResult res =
        train_eos(gray_fields, start, setup, weights, problem, &gray.state);
    CHECK(res.mismatch < 0.5 * m0);
  }
}
