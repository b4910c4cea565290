#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "criteria.hpp"
#include "twinmodel/adjoint.hpp"
#include "twinmodel/inference.hpp"
#include "twinmodel/objective.hpp"
#include "twinmodel/scenarios.hpp"

namespace acceptance {

using namespace twin;
namespace fs = std::filesystem;

namespace {

char buf[512];

std::string fmt(const char* f, auto... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_l2(std::span<const double> got, std::span<const double> want) {
  double d2 = 0.0, w2 = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    d2 += (got[i] - want[i]) * (got[i] - want[i]);
    w2 += want[i] * want[i];
  }
  return w2 > 0.0 ? std::sqrt(d2 / w2) : std::sqrt(d2);
}

RunRecord smooth_run(int n, double newton_tol) {
  auto grid = make_grid(Grid1D::uniform(n, n, 1.0, 1.0));
  InitialConditionSpec ic;
  ic.family = InitialConditionSpec::Family::gaussian;
  ic.base = 0.25;
  ic.amplitude = 0.5;
  ic.center = 0.513;
  ic.width = 0.11;
  ControlSpec cs;
  cs.kind = ControlSpec::Kind::gaussian_pulse;
  cs.amplitude = 0.25;
  cs.t_center = 0.45;
  cs.x_center = 0.6;
  cs.t_width = 0.2;
  cs.x_width = 0.15;
  SolverConfig cfg;
  cfg.newton_tol = newton_tol;
  return solve_spacetime(make_initial_condition(ic, *grid),
                         std::make_shared<BuckleyLeverettFlux>(2.0), make_control(cs, grid),
                         grid, cfg);
}

}  // namespace

// ---------------------------------------------------------------------------
// criterion 1: adjoint gradients match central finite differences
// ---------------------------------------------------------------------------

CriterionReport criterion1() {
  CriterionReport rep{1, "adjoint gradients match finite differences", {}};

  {  // controls, N = 50, 10 random entries, h = 1e-6
    RunRecord run = smooth_run(50, 1e-13);
    ObjectiveSpec spec;
    spec.u_target = 0.5;
    spec.control_penalty = 0.3;
    const double margin = limiter_tie_margin(run);
    ControlField grad = adjoint_gradient_wrt_control(run, spec);
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> pick_k(0, run.grid->n_time() - 1),
        pick_i(0, run.grid->n_cells() - 1);
    std::vector<double> fd, adj;
    for (int t = 0; t < 10; ++t) {
      const int k = pick_k(rng), i = pick_i(rng);
      const double h = 1e-6 * std::max(1.0, std::abs(run.control.at(k, i)));
      ControlField cp = run.control, cm = run.control;
      cp.at(k, i) += h;
      cm.at(k, i) -= h;
      RunRecord rp = solve_spacetime(run.solution.row(0), run.model, cp, run.grid, run.config);
      RunRecord rm = solve_spacetime(run.solution.row(0), run.model, cm, run.grid, run.config);
      fd.push_back((evaluate_objective(rp, spec) - evaluate_objective(rm, spec)) / (2 * h));
      adj.push_back(grad.at(k, i));
    }
    const double err = rel_l2(adj, fd);
    rep.checks.push_back({"dJ/dc vs FD (10 random entries)", err < 1e-5 && margin > 1e-7,
                          fmt("rel_l2 %.3e (tol 1e-5), tie margin %.2e", err, margin)});
  }

  {  // flux coefficients, N = 50
    auto grid = make_grid(Grid1D::uniform(50, 50, 1.0, 1.0));
    InitialConditionSpec ic;
    ic.family = InitialConditionSpec::Family::gaussian;
    ic.base = 0.22;
    ic.amplitude = 0.55;
    ic.center = 0.487;
    ic.width = 0.13;
    std::vector<double> u0 = make_initial_condition(ic, *grid);
    SigmoidFluxBasis basis = SigmoidFluxBasis::equispaced(12, -0.1, 1.1);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coeff(0.02, 0.2);
    std::vector<double> xi(12);
    for (double& x : xi) x = coeff(rng);
    SolverConfig cfg;
    cfg.newton_tol = 1e-13;
    ControlField control(grid);
    RunRecord run = solve_spacetime(u0, std::make_shared<TwinFlux>(basis, xi), control, grid,
                                    cfg);
    ObjectiveSpec spec;
    spec.u_target = 0.4;
    std::vector<double> grad = adjoint_gradient_wrt_params(run, spec);
    std::vector<double> fd(12);
    for (int j = 0; j < 12; ++j) {
      const double h = 1e-6 * std::max(1.0, xi[j]);
      auto xp = xi, xm = xi;
      xp[j] += h;
      xm[j] -= h;
      RunRecord rp =
          solve_spacetime(u0, std::make_shared<TwinFlux>(basis, xp), control, grid, cfg);
      RunRecord rm =
          solve_spacetime(u0, std::make_shared<TwinFlux>(basis, xm), control, grid, cfg);
      fd[j] = (evaluate_objective(rp, spec) - evaluate_objective(rm, spec)) / (2 * h);
    }
    const double err = rel_l2(grad, fd);
    rep.checks.push_back({"dJ/dxi vs FD (all coefficients)", err < 1e-5,
                          fmt("rel_l2 %.3e (tol 1e-5)", err)});
  }

  rep.checks.push_back(c1_eos_params_check());
  rep.checks.push_back(c1_geometry_check());
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 2: discrete conservation
// ---------------------------------------------------------------------------

CriterionReport criterion2() {
  CriterionReport rep{2, "discrete conservation", {}};

  auto grid = make_grid(Grid1D::uniform(100, 100, 1.0, 1.0));
  InitialConditionSpec ic;
  ic.family = InitialConditionSpec::Family::square_wave;
  ic.base = 0.0;
  ic.amplitude = 1.0;
  ic.center = 0.4;
  ic.width = 0.3;
  ControlSpec cs;
  cs.kind = ControlSpec::Kind::gaussian_pulse;
  cs.amplitude = 0.3;
  SolverConfig cfg;  // newton_tol 1e-10 default
  ControlField control = make_control(cs, grid);
  RunRecord run = solve_spacetime(make_initial_condition(ic, *grid),
                                  std::make_shared<BuckleyLeverettFlux>(2.0), control, grid,
                                  cfg);
  double worst = 0.0;
  for (int k = 0; k + 1 < grid->n_time(); ++k) {
    const double dt = grid->t_step(k);
    double src = 0.0;
    for (int i = 0; i < 100; ++i)
      src += 0.5 * (control.at(k, i) + control.at(k + 1, i)) * grid->x_width(i);
    worst = std::max(worst, std::abs(total_mass(run, k + 1) - total_mass(run, k) - dt * src));
  }
  const double bound = cfg.newton_tol * 100;  // newton_tol * N_x = 1e-8
  rep.checks.push_back({"porous: mass balance vs source integral over all steps",
                        worst < bound, fmt("max defect %.3e (bound %.1e)", worst, bound)});

  for (Check& c : c2_nozzle_checks()) rep.checks.push_back(std::move(c));
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 3: self-consistency recovery
// ---------------------------------------------------------------------------

CriterionReport criterion3() {
  CriterionReport rep{3, "self-consistency recovery of a known twin flux", {}};

  SigmoidFluxBasis basis = SigmoidFluxBasis::equispaced(20, -0.1, 1.1);
  std::vector<double> xi_star(20);
  for (int k = 0; k < 20; ++k) {
    const double eta = basis.center(k);
    xi_star[k] = 0.02 + 0.2 * std::exp(-(eta - 0.7) * (eta - 0.7) / 0.08);
  }
  auto grid = make_grid(Grid1D::uniform(100, 100, 1.0, 1.0));
  InitialConditionSpec ic;
  ic.family = InitialConditionSpec::Family::square_wave;
  ic.base = 0.0;
  ic.amplitude = 1.0;
  ic.center = 0.45;
  ic.width = 0.35;
  SolverConfig cfg;
  ControlField control(grid);
  RunRecord gray = solve_spacetime(make_initial_condition(ic, *grid),
                                   std::make_shared<TwinFlux>(basis, xi_star), control, grid,
                                   cfg);

  std::vector<double> start(20);
  for (int k = 0; k < 20; ++k)
    start[k] = std::max(xi_star[k] * (1.0 + 0.3 * std::sin(3.0 * k + 1.0)), 0.01);

  InferenceProblem problem;
  problem.lambda = 1e-8;
  problem.optimizer.max_iters = 400;
  FluxTrainingResult res = train_flux(gray.solution, control, cfg, basis, problem, start);

  TwinFlux truth(basis, xi_star);
  const Interval excited = excited_range(gray.solution);
  RecoveryReport rec =
      flux_recovery_report(res.model, truth, excited, Interval{-0.1, 1.1});
  rep.checks.push_back({"sup-norm slope error on the excited domain", rec.in_sup < 1e-2,
                        fmt("sup %.3e (tol 1e-2), mismatch %.2e, %d iterations", rec.in_sup,
                            res.mismatch, res.iterations)});
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 4: study 1 (flux inference across initial conditions)
// ---------------------------------------------------------------------------

namespace {

struct StudyCase {
  std::string name;
  InitialConditionSpec ic;
};

std::vector<StudyCase> study_cases() {
  std::vector<StudyCase> cases;
  {
    InitialConditionSpec ic;
    ic.family = InitialConditionSpec::Family::sine;
    ic.base = 0.45;
    ic.amplitude = 0.1;
    cases.push_back({"sine[0.45,0.55]", ic});
  }
  {
    InitialConditionSpec ic;
    ic.family = InitialConditionSpec::Family::gaussian;
    ic.base = 0.3;
    ic.amplitude = 0.4;
    ic.center = 0.513;
    ic.width = 0.11;
    cases.push_back({"gauss[0.3,0.7]", ic});
  }
  {
    InitialConditionSpec ic;
    ic.family = InitialConditionSpec::Family::gaussian;
    ic.base = 0.15;
    ic.amplitude = 0.7;
    ic.center = 0.513;
    ic.width = 0.12;
    cases.push_back({"gauss[0.15,0.85]", ic});
  }
  {
    InitialConditionSpec ic;
    ic.family = InitialConditionSpec::Family::ramp;
    ic.base = 0.1;
    ic.amplitude = 0.8;
    cases.push_back({"ramp[0.1,0.9]", ic});
  }
  {
    InitialConditionSpec ic;
    ic.family = InitialConditionSpec::Family::square_wave;
    ic.base = 0.0;
    ic.amplitude = 1.0;
    ic.center = 0.45;
    ic.width = 0.35;
    cases.push_back({"square[0,1]", ic});
  }
  return cases;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int x, int y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t p = 0; p < idx.size(); ++p) r[idx[p]] = static_cast<double>(p);
    return r;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

CriterionReport criterion4() {
  CriterionReport rep{4, "study 1: Buckley-Leverett flux inference across ICs", {}};
  const BuckleyLeverettFlux truth(2.0);
  SigmoidFluxBasis basis = SigmoidFluxBasis::equispaced(20, -0.1, 1.1);
  ObjectiveSpec spec;  // (u - 0.5)^2

  std::vector<double> excited_widths, recovered_widths;
  double worst_flux = 0.0, worst_grad = 0.0;

  for (const StudyCase& sc : study_cases()) {
    auto grid = make_grid(Grid1D::uniform(100, 100, 1.0, 1.0));
    SolverConfig cfg;
    ControlField control(grid);
    RunRecord gray = solve_spacetime(make_initial_condition(sc.ic, *grid),
                                     std::make_shared<BuckleyLeverettFlux>(2.0), control,
                                     grid, cfg);

    std::vector<double> xi0 = initial_flux_guess(gray.solution, basis);
    FluxTrainingObjective probe(gray.solution, control, cfg, basis, 0.0);
    InferenceProblem problem;
    problem.lambda = relative_lambda(probe, xi0);
    problem.optimizer.max_iters = 300;
    FluxTrainingResult res = train_flux(gray.solution, control, cfg, basis, problem, xi0);

    const Interval excited = excited_range(gray.solution);
    RecoveryReport rec =
        flux_recovery_report(res.model, truth, excited, Interval{-0.1, 1.1});
    worst_flux = std::max(worst_flux, rec.in_rel_l2);

    auto model = std::make_shared<TwinFlux>(res.model);
    RunRecord twin_run = solve_spacetime(gray.solution.row(0), model, control, grid, cfg);
    ControlField g_twin = adjoint_gradient_wrt_control(twin_run, spec);
    ControlField g_truth = adjoint_gradient_wrt_control(gray, spec);
    const double gerr = rel_l2(g_twin.values(), g_truth.values());
    worst_grad = std::max(worst_grad, gerr);

    excited_widths.push_back(excited.width());
    recovered_widths.push_back(recovered_range_width(res.model, truth, Interval{0.0, 1.0}));
  }

  rep.checks.push_back({"(a) dF/du recovery on the excited domain, all ICs",
                        worst_flux <= 0.10,
                        fmt("worst rel_l2 %.4f (tol 0.10)", worst_flux)});
  rep.checks.push_back({"(b) twin dJ/dc vs truth dJ/dc, all ICs", worst_grad <= 0.15,
                        fmt("worst rel_l2 %.4f (tol 0.15)", worst_grad)});
  const double rho = spearman(excited_widths, recovered_widths);
  std::string detail = "widths";
  for (std::size_t i = 0; i < excited_widths.size(); ++i)
    detail += fmt(" (%.2f->%.2f)", excited_widths[i], recovered_widths[i]);
  rep.checks.push_back({"(c) wider excited domain => wider recovery range", rho >= 0.7,
                        fmt("spearman %.2f;%s", rho, detail.c_str())});
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 6: lasso sweep behavior
// ---------------------------------------------------------------------------

CriterionReport criterion6() {
  CriterionReport rep{6, "lasso sweep: shrinking coefficient mass, sparsity", {}};

  auto grid = make_grid(Grid1D::uniform(60, 60, 1.0, 1.0));
  InitialConditionSpec ic;
  ic.family = InitialConditionSpec::Family::gaussian;
  ic.base = 0.3;
  ic.amplitude = 0.4;
  ic.center = 0.513;
  ic.width = 0.11;
  SolverConfig cfg;
  ControlField control(grid);
  RunRecord gray = solve_spacetime(make_initial_condition(ic, *grid),
                                   std::make_shared<BuckleyLeverettFlux>(2.0), control, grid,
                                   cfg);

  SigmoidFluxBasis basis = SigmoidFluxBasis::equispaced(20, -0.1, 1.1);
  std::vector<double> xi = initial_flux_guess(gray.solution, basis);
  FluxTrainingObjective probe(gray.solution, control, cfg, basis, 0.0);
  const double lambda0 = relative_lambda(probe, xi, 1e-4);

  std::vector<double> sums;
  int zeros_at_largest = 0;
  for (int s = 0; s < 3; ++s) {
    InferenceProblem problem;
    problem.lambda = lambda0 * std::pow(10.0, s);
    problem.optimizer.max_iters = 250;
    FluxTrainingResult res = train_flux(gray.solution, control, cfg, basis, problem, xi);
    xi = res.model.coefficients();
    double sum = 0.0;
    int zeros = 0;
    for (double v : xi) {
      sum += v;
      if (v < 1e-8) ++zeros;
    }
    sums.push_back(sum);
    zeros_at_largest = zeros;
  }

  const bool monotone = sums[1] <= sums[0] * (1 + 1e-9) && sums[2] <= sums[1] * (1 + 1e-9);
  rep.checks.push_back({"coefficient mass non-increasing across the sweep", monotone,
                        fmt("sum(xi): %.5f -> %.5f -> %.5f", sums[0], sums[1], sums[2])});
  rep.checks.push_back({"at the largest lambda >= 25% of coefficients below 1e-8",
                        zeros_at_largest >= 5,
                        fmt("%d of 20 coefficients at zero", zeros_at_largest)});
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 7: determinism of CLI artifacts
// ---------------------------------------------------------------------------

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TWINMODEL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CriterionReport criterion7() {
  CriterionReport rep{7, "fixed-seed repeat runs produce byte-identical artifacts", {}};

  const fs::path base = fs::temp_directory_path() / ("twin_accept7_" + std::to_string(getpid()));
  fs::remove_all(base);
  fs::create_directories(base);

  const fs::path cfg_p = base / "porous.json";
  {
    std::ofstream out(cfg_p);
    out << R"({"case":"porous1d","seed":42,"grid":{"nx":40,"nt":40},
      "initial_condition":{"family":"gaussian","base":0.25,"amplitude":0.5,"center":0.51,"width":0.11},
      "truth":{"flux":{"type":"buckley_leverett","A":2.0}},
      "basis":{"m":12},"optimizer":{"max_iters":60}})";
  }
  const fs::path cfg_n = base / "nozzle.json";
  {
    std::ofstream out(cfg_n);
    out << R"({"case":"nozzle-eos","seed":42,
      "truth":{"eos":{"type":"vdw","a":1e4,"b":0.1}},
      "optimizer":{"max_iters":60},"nozzle":{"n_cells":40,"calib_n_random":3}})";
  }

  auto pipeline = [&](const fs::path& cfg, const fs::path& out) {
    return run_cli("generate --config " + cfg.string() + " --out " + out.string()) == 0 &&
           run_cli("train --config " + cfg.string() + " --out " + out.string()) == 0 &&
           run_cli("gradient --truth-mode --config " + cfg.string() + " --out " +
                   out.string()) == 0 &&
           run_cli("report --config " + cfg.string() + " --out " + out.string()) == 0;
  };

  for (auto [cfg, tag] : {std::pair{cfg_p, "porous"}, std::pair{cfg_n, "nozzle"}}) {
    const fs::path a = base / (std::string(tag) + "_a"), b = base / (std::string(tag) + "_b");
    const bool ok_a = pipeline(cfg, a), ok_b = pipeline(cfg, b);
    bool identical = ok_a && ok_b;
    std::string first_diff = "";
    if (identical) {
      for (const char* rel :
           {"gray/solution.csv", "gray/meta.json", "twin/model.json", "twin/trace.csv",
            "twin/summary.json", "gradients/summary.json", "report/report.json"}) {
        if (slurp(a / rel) != slurp(b / rel)) {
          identical = false;
          first_diff = rel;
          break;
        }
      }
    }
    rep.checks.push_back({std::string(tag) + " pipeline artifacts byte-identical", identical,
                          ok_a && ok_b ? (identical ? "all artifacts match"
                                                    : "first difference: " + first_diff)
                                       : "pipeline run failed"});
  }
  fs::remove_all(base);
  return rep;
}

}  // namespace acceptance
