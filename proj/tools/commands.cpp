#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>
#include <vector>

#include <json.hpp>

#include "twinmodel/adjoint.hpp"
#include "twinmodel/errors.hpp"
#include "twinmodel/inference.hpp"
#include "twinmodel/nozzle_adjoint.hpp"

namespace twin::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void write_json(const ordered_json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw io_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void copy_config(const CommandContext& ctx) {
  fs::create_directories(ctx.out_dir);
  const fs::path dst = fs::path(ctx.out_dir) / "config.json";
  std::ifstream in(ctx.config_path, std::ios::binary);
  if (!in) throw io_error("cannot reopen config " + ctx.config_path);
  std::ofstream out(dst, std::ios::binary);
  out << in.rdbuf();
}

void require_artifacts(const std::vector<fs::path>& paths) {
  std::string missing;
  for (const auto& p : paths)
    if (!fs::exists(p)) missing += (missing.empty() ? "" : ", ") + p.string();
  if (!missing.empty()) throw io_error("missing input artifacts: " + missing);
}

// ---------------------------------------------------------------------------
// porous1d helpers
// ---------------------------------------------------------------------------

RunRecord run_gray_porous(const ExperimentConfig& cfg) {
  auto grid = make_grid(Grid1D::uniform(cfg.nx, cfg.nt, cfg.length, cfg.horizon));
  auto model = std::make_shared<BuckleyLeverettFlux>(cfg.truth_flux_a);
  return solve_spacetime(make_initial_condition(cfg.initial_condition, *grid), model,
                         make_control(cfg.control, grid), grid, cfg.solver);
}

double max_mass_defect(const RunRecord& run) {
  const Grid1D& g = *run.grid;
  double worst = 0.0;
  for (int k = 0; k + 1 < g.n_time(); ++k) {
    const double dt = g.t_step(k);
    double src = 0.0;
    for (int i = 0; i < g.n_cells(); ++i)
      src += 0.5 * (run.control.at(k, i) + run.control.at(k + 1, i)) * g.x_width(i);
    worst = std::max(worst,
                     std::abs(total_mass(run, k + 1) - total_mass(run, k) - dt * src));
  }
  return worst;
}

double resolve_lambda(const ExperimentConfig& cfg, const FluxTrainingObjective& objective,
                      std::span<const double> xi0) {
  if (!cfg.lambda_relative) return cfg.lambda_value;
  return relative_lambda(objective, xi0, cfg.lambda_value);
}

const char* status_name(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::converged: return "converged";
    case LbfgsStatus::max_iterations: return "max_iterations";
    case LbfgsStatus::line_search_failed: return "line_search_failed";
  }
  return "?";
}

void write_training_summary(const fs::path& path, LbfgsStatus status, int iterations,
                            double objective, double mismatch, double reg_term, double lambda) {
  ordered_json j;
  j["status"] = status_name(status);
  j["iterations"] = iterations;
  j["objective"] = objective;
  j["mismatch"] = mismatch;
  j["reg_term"] = reg_term;
  j["lambda"] = lambda;
  write_json(j, path);
}

// ---------------------------------------------------------------------------
// nozzle helpers
// ---------------------------------------------------------------------------

struct NozzleGray {
  GridPtr grid;
  std::array<SteadyField, 3> fields;
  NozzleState state;
  std::vector<std::array<double, 2>> cloud;  // dimensional (rho, U)
};

NozzleGray load_nozzle_gray(const ExperimentConfig& cfg, const fs::path& csv) {
  NozzleSolutionData d = read_nozzle_csv(csv.string());
  const int n = static_cast<int>(d.x.size());
  auto grid = make_grid(Grid1D::spatial(n, cfg.control_points.back()[0] -
                                               cfg.control_points.front()[0]));
  SteadyField rho(grid, d.rho), u(grid, d.u), e(grid, d.E);
  std::array<SteadyField, 3> fields{std::move(rho), std::move(u), std::move(e)};
  NozzleState state = state_from_fields(fields, grid, cfg.flow_bc);
  std::vector<std::array<double, 2>> cloud(n);
  for (int i = 0; i < n; ++i) cloud[i] = state.state_point(i);
  return NozzleGray{grid, std::move(fields), std::move(state), std::move(cloud)};
}

NozzleSetup make_setup(const ExperimentConfig& cfg, GridPtr grid) {
  return NozzleSetup{cfg.make_area(), cfg.flow_bc, std::move(grid), cfg.nozzle_config};
}

}  // namespace

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

void cmd_generate(const CommandContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  copy_config(ctx);
  const fs::path gray_dir = fs::path(ctx.out_dir) / "gray";
  fs::create_directories(gray_dir);

  ordered_json meta;
  meta["case"] = cfg.case_name();
  meta["seed"] = cfg.seed;

  if (cfg.experiment == ExperimentConfig::Case::porous1d) {
    RunRecord run = run_gray_porous(cfg);
    const double defect = max_mass_defect(run);
    if (defect > 100.0 * cfg.solver.newton_tol * cfg.nx)
      throw error("gray-box run failed the conservation check");
    write_field_csv(run.solution, (gray_dir / "solution.csv").string());
    const Interval ex = excited_range(run.solution);
    meta["truth"] = {{"flux", {{"type", "buckley_leverett"}, {"A", cfg.truth_flux_a}}}};
    meta["grid"] = {{"nx", cfg.nx}, {"nt", cfg.nt}, {"length", cfg.length},
                    {"horizon", cfg.horizon}};
    meta["excited"] = {ex.lo, ex.hi};
    meta["mass_defect_max"] = defect;
  } else {
    auto grid = make_grid(Grid1D::spatial(
        cfg.nozzle_cells, cfg.control_points.back()[0] - cfg.control_points.front()[0]));
    const BsplineArea area = cfg.make_area();
    const ReferenceEos eos = cfg.make_truth_eos();
    SteadyResult res = solve_steady(eos, area, cfg.flow_bc, grid, cfg.nozzle_config);
    const MassFluxPair mf = mass_flux_pair(res.state, eos, area, cfg.flow_bc,
                                           cfg.nozzle_config);
    if (std::abs(mf.inlet - mf.outlet) > 10.0 * cfg.nozzle_config.steady_tol)
      throw error("gray-box steady run failed the mass-flux agreement check");
    write_nozzle_csv(res.state, eos, area, (gray_dir / "solution.csv").string());
    meta["truth"] = {{"eos",
                      {{"type", cfg.truth_eos_kind},
                       {"gamma", cfg.truth_eos_gamma},
                       {"a", cfg.truth_eos_a},
                       {"b", cfg.truth_eos_b}}}};
    meta["nozzle"] = {{"n_cells", cfg.nozzle_cells},
                      {"p_total_in", cfg.flow_bc.p_total_in},
                      {"p_out", cfg.flow_bc.p_out},
                      {"rho_ref", cfg.flow_bc.rho_ref}};
    meta["mass_flux"] = {{"inlet", mf.inlet}, {"outlet", mf.outlet}};
    meta["steps"] = res.steps;
    meta["residual_final"] = res.residual_history.back();
  }
  write_json(meta, gray_dir / "meta.json");
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void cmd_train(const CommandContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  const fs::path gray_csv = fs::path(ctx.out_dir) / "gray" / "solution.csv";
  require_artifacts({gray_csv});
  const fs::path twin_dir = fs::path(ctx.out_dir) / "twin";
  fs::create_directories(twin_dir);

  if (cfg.experiment == ExperimentConfig::Case::porous1d) {
    SpaceTimeField gray = read_field_csv(gray_csv.string());
    ControlField control = make_control(cfg.control, gray.grid_ptr());
    SigmoidFluxBasis basis = cfg.make_basis();
    std::vector<double> xi0 = initial_flux_guess(gray, basis);

    FluxTrainingObjective probe(gray, control, cfg.solver, basis, 0.0);
    InferenceProblem problem;
    problem.lambda = resolve_lambda(cfg, probe, xi0);
    problem.optimizer = cfg.optimizer;

    FluxTrainingResult res = train_flux(gray, control, cfg.solver, basis, problem, xi0);
    save_twin_flux(res.model, (twin_dir / "model.json").string());
    write_trace_csv(res.trace, (twin_dir / "trace.csv").string());
    write_training_summary(twin_dir / "summary.json", res.status, res.iterations,
                           res.objective, res.mismatch, res.reg_term, problem.lambda);
  } else {
    NozzleGray gray = load_nozzle_gray(cfg, gray_csv);
    NozzleSetup setup = make_setup(cfg, gray.grid);
    std::vector<double> rho_cloud(gray.cloud.size()), u_cloud(gray.cloud.size());
    for (std::size_t i = 0; i < gray.cloud.size(); ++i) {
      rho_cloud[i] = gray.cloud[i][0];
      u_cloud[i] = gray.cloud[i][1];
    }
    ParamEos skeleton = build_param_eos(rho_cloud, u_cloud, cfg.n_rho, cfg.n_u);
    WeightSet weights =
        calibrate_weights(gray.fields, skeleton, setup, cfg.calib_n_random, cfg.seed);
    const std::vector<double> p_rec =
        recover_pressure_from_momentum(gray.fields, setup.area, cfg.flow_bc);
    ParamEos start = initial_eos_guess(skeleton, gray.cloud, p_rec);

    InferenceProblem problem;
    problem.optimizer = cfg.optimizer;
    if (cfg.lambda_relative) {
      EosTrainingObjective probe(gray.fields, start, setup, weights, 0.0, &gray.state);
      double m0 = 0.0;
      std::vector<double> g(start.num_params());
      if (!probe(start.packed_params(), m0, g))
        throw error("twin steady solve failed at the initial guess");
      problem.lambda = cfg.lambda_value * m0;
    } else {
      problem.lambda = cfg.lambda_value;
    }

    EosTrainingResult res =
        train_eos(gray.fields, start, setup, weights, problem, &gray.state);
    save_param_eos(res.model, (twin_dir / "model.json").string());
    write_trace_csv(res.trace, (twin_dir / "trace.csv").string());
    write_training_summary(twin_dir / "summary.json", res.status, res.iterations,
                           res.objective, res.mismatch, res.reg_term, problem.lambda);
    ordered_json wj;
    wj["w_rho"] = weights.w_rho;
    wj["w_u"] = weights.w_u;
    wj["w_E"] = weights.w_E;
    wj["n_random"] = cfg.calib_n_random;
    wj["seed"] = cfg.seed;
    write_json(wj, twin_dir / "weights.json");
  }
}

// ---------------------------------------------------------------------------
// gradient
// ---------------------------------------------------------------------------

namespace {

void write_gradient_summary(const fs::path& path, const GradientReport& rep,
                            double acceptance, bool truth_mode) {
  ordered_json j;
  j["linf_err"] = rep.linf_err;
  j["rel_l2_err"] = rep.rel_l2_err;
  j["has_reference"] = !rep.reference.empty();
  j["provenance_twin"] = rep.provenance_twin;
  j["provenance_reference"] = rep.provenance_reference;
  j["acceptance_threshold"] = acceptance;
  if (truth_mode) j["accepted"] = rep.rel_l2_err <= acceptance;
  write_json(j, path);
}

}  // namespace

void cmd_gradient(const CommandContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  const fs::path model_path = fs::path(ctx.out_dir) / "twin" / "model.json";
  const fs::path gray_csv = fs::path(ctx.out_dir) / "gray" / "solution.csv";
  require_artifacts({model_path, gray_csv});
  const fs::path grad_dir = fs::path(ctx.out_dir) / "gradients";
  fs::create_directories(grad_dir);

  if (cfg.experiment == ExperimentConfig::Case::porous1d) {
    SpaceTimeField gray = read_field_csv(gray_csv.string());
    ControlField control = make_control(cfg.control, gray.grid_ptr());
    auto twin_model = std::make_shared<TwinFlux>(load_twin_flux(model_path.string()));

    RunRecord twin_run =
        solve_spacetime(gray.row(0), twin_model, control, gray.grid_ptr(), cfg.solver);
    ControlField dj_twin = adjoint_gradient_wrt_control(twin_run, cfg.objective);

    std::vector<double> reference;
    if (ctx.truth_mode) {
      auto truth = std::make_shared<BuckleyLeverettFlux>(cfg.truth_flux_a);
      RunRecord truth_run =
          solve_spacetime(gray.row(0), truth, control, gray.grid_ptr(), cfg.solver);
      reference = adjoint_gradient_wrt_control(truth_run, cfg.objective).values();
    }
    GradientReport rep = GradientReport::compare(
        dj_twin.values(), std::move(reference), "twin-model adjoint",
        ctx.truth_mode ? "truth-model adjoint" : "");
    rep.write_csv((grad_dir / "control_grad.csv").string());
    write_gradient_summary(grad_dir / "summary.json", rep, cfg.gradient_acceptance,
                           ctx.truth_mode);
  } else {
    NozzleGray gray = load_nozzle_gray(cfg, gray_csv);
    const BsplineArea area = cfg.make_area();
    ParamEos twin_eos = load_param_eos(model_path.string());

    NozzleSetup setup = make_setup(cfg, gray.grid);
    const std::vector<double> p_rec =
        recover_pressure_from_momentum(gray.fields, setup.area, cfg.flow_bc);
    const EosHomotopyAnchor anchor = make_homotopy_anchor(gray.cloud, p_rec);
    SteadyResult twin_run = solve_steady_robust(twin_eos, setup, &gray.state, anchor);
    GeometryGradient g_twin = adjoint_gradient_wrt_geometry(
        twin_run.state, twin_eos, area, cfg.flow_bc, cfg.nozzle_config,
        SteadyObjective::mass_flux);

    const int np = area.num_points();
    auto interior_flat = [np](const GeometryGradient& g) {
      std::vector<double> v;
      for (int p = 1; p + 1 < np; ++p) v.push_back(g.d_x[p]);
      for (int p = 1; p + 1 < np; ++p) v.push_back(g.d_area[p]);
      return v;
    };

    std::vector<double> reference;
    if (ctx.truth_mode) {
      const ReferenceEos truth = cfg.make_truth_eos();
      SteadyResult truth_run =
          solve_steady(truth, area, cfg.flow_bc, gray.grid, cfg.nozzle_config, &gray.state);
      GeometryGradient g_truth = adjoint_gradient_wrt_geometry(
          truth_run.state, truth, area, cfg.flow_bc, cfg.nozzle_config,
          SteadyObjective::mass_flux);
      reference = interior_flat(g_truth);
    }
    GradientReport rep = GradientReport::compare(
        interior_flat(g_twin), std::move(reference), "twin-model adjoint",
        ctx.truth_mode ? "truth-model adjoint" : "");

    // per-control-point table (x components then A components, interior pts)
    std::ofstream out(grad_dir / "geometry_grad.csv");
    out << "point,coordinate,grad_twin,grad_reference,abs_err\n";
    char buf[160];
    const int m = np - 2;
    for (int row = 0; row < 2 * m; ++row) {
      const int point = 1 + (row % m);
      const char* coord = row < m ? "x" : "A";
      if (!rep.reference.empty()) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%.17g,%.17g\n", point, coord,
                      rep.gradient[row], rep.reference[row],
                      std::abs(rep.gradient[row] - rep.reference[row]));
      } else {
        std::snprintf(buf, sizeof buf, "%d,%s,%.17g,,\n", point, coord, rep.gradient[row]);
      }
      out << buf;
    }
    write_gradient_summary(grad_dir / "summary.json", rep, cfg.gradient_acceptance,
                           ctx.truth_mode);
  }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

void cmd_report(const CommandContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  const fs::path out = fs::path(ctx.out_dir);
  const fs::path report_dir = out / "report";
  const fs::path gray_csv = out / "gray" / "solution.csv";
  const fs::path model_path = out / "twin" / "model.json";
  require_artifacts({gray_csv, model_path});
  fs::create_directories(report_dir);

  ordered_json report;
  report["case"] = cfg.case_name();

  if (cfg.experiment == ExperimentConfig::Case::porous1d) {
    SpaceTimeField gray = read_field_csv(gray_csv.string());
    auto twin_model = std::make_shared<TwinFlux>(load_twin_flux(model_path.string()));
    const BuckleyLeverettFlux truth(cfg.truth_flux_a);
    const Interval excited = excited_range(gray);
    const Interval ambient{cfg.basis_lo, cfg.basis_hi};

    {
      std::ofstream fd(report_dir / "flux_derivative.csv");
      fd << "u,slope_twin,slope_truth\n";
      char buf[128];
      const int samples = 512;
      for (int s = 0; s < samples; ++s) {
        const double u = ambient.lo + ambient.width() * s / (samples - 1);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", u, twin_model->slope(u),
                      truth.slope(u));
        fd << buf;
      }
    }

    ControlField control = make_control(cfg.control, gray.grid_ptr());
    RunRecord twin_run =
        solve_spacetime(gray.row(0), twin_model, control, gray.grid_ptr(), cfg.solver);
    {
      std::ofstream mm(report_dir / "mismatch.csv");
      mm << "t,x,abs_diff\n";
      char buf[128];
      const Grid1D& g = gray.grid();
      for (int k = 0; k < g.n_time(); ++k)
        for (int i = 0; i < g.n_cells(); ++i) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.t_point(k), g.x_center(i),
                        std::abs(twin_run.solution.at(k, i) - gray.at(k, i)));
          mm << buf;
        }
    }

    const RecoveryReport rec = flux_recovery_report(*twin_model, truth, excited, ambient);
    report["flux_derivative"] = {
        {"excited", {excited.lo, excited.hi}},
        {"in_rel_l2", rec.in_rel_l2},
        {"in_sup", rec.in_sup},
        {"out_rel_l2", rec.out_rel_l2},
        {"out_sup", rec.out_sup},
        {"recovered_width", recovered_range_width(*twin_model, truth, ambient)}};
    report["mismatch"] = {{"value", mismatch_spacetime(twin_run.solution, gray)}};
  } else {
    NozzleGray gray = load_nozzle_gray(cfg, gray_csv);
    ParamEos twin_eos = load_param_eos(model_path.string());
    const ReferenceEos truth = cfg.make_truth_eos();

    StateHull hull = convex_hull(gray.cloud);
    save_hull(hull, (report_dir / "hull.json").string());

    double rho_lo = gray.cloud[0][0], rho_hi = rho_lo, u_lo = gray.cloud[0][1], u_hi = u_lo;
    for (const auto& p : gray.cloud) {
      rho_lo = std::min(rho_lo, p[0]);
      rho_hi = std::max(rho_hi, p[0]);
      u_lo = std::min(u_lo, p[1]);
      u_hi = std::max(u_hi, p[1]);
    }
    // inflate the lattice 30% beyond the hull box, clipped to validity
    const double rho_pad = 0.3 * (rho_hi - rho_lo), u_pad = 0.3 * (u_hi - u_lo);
    Interval rho_range{std::max(rho_lo - rho_pad, 1e-6), rho_hi + rho_pad};
    Interval u_range{std::max(u_lo - u_pad, 1e-6), u_hi + u_pad};
    if (cfg.truth_eos_kind != "ideal")
      rho_range.hi = std::min(rho_range.hi, 0.95 / cfg.truth_eos_b);

    const int n_lattice = 48;
    {
      std::ofstream lat(report_dir / "eos_lattice.csv");
      lat << "rho,U,p_twin,p_truth,in_hull\n";
      char buf[192];
      for (int a = 0; a < n_lattice; ++a) {
        const double rho = rho_range.lo + rho_range.width() * a / (n_lattice - 1);
        for (int b = 0; b < n_lattice; ++b) {
          const double u = u_range.lo + u_range.width() * b / (n_lattice - 1);
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", rho, u,
                        twin_eos.pressure(rho, u), truth.pressure(rho, u),
                        hull.contains(rho, u) ? 1 : 0);
          lat << buf;
        }
      }
    }

    const RecoveryReport rec =
        eos_recovery_report(twin_eos, truth, hull, rho_range, u_range, n_lattice, n_lattice);
    report["eos"] = {{"in_rel_l2", rec.in_rel_l2},
                     {"in_sup", rec.in_sup},
                     {"out_rel_l2", rec.out_rel_l2},
                     {"out_sup", rec.out_sup},
                     {"n_in", rec.n_in},
                     {"n_out", rec.n_out},
                     {"hull_ordering_ok", rec.in_rel_l2 <= rec.out_rel_l2}};
  }

  const fs::path grad_summary = out / "gradients" / "summary.json";
  if (fs::exists(grad_summary)) report["gradient"] = read_json(grad_summary);

  write_json(report, report_dir / "report.json");
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

void cmd_sweep(const CommandContext& ctx) {
  const ExperimentConfig& cfg = ctx.config;
  if (cfg.experiment != ExperimentConfig::Case::porous1d)
    throw config_error("sweep mode supports the porous1d case");
  const fs::path gray_csv = fs::path(ctx.out_dir) / "gray" / "solution.csv";
  require_artifacts({gray_csv});

  SpaceTimeField gray = read_field_csv(gray_csv.string());
  ControlField control = make_control(cfg.control, gray.grid_ptr());
  SigmoidFluxBasis basis = cfg.make_basis();
  const std::vector<double> xi0 = initial_flux_guess(gray, basis);

  FluxTrainingObjective probe(gray, control, cfg.solver, basis, 0.0);
  const double lambda0 = resolve_lambda(cfg, probe, xi0);

  struct SweepRow {
    int index;
    double lambda, objective, mismatch, reg_term, coeff_sum;
    int n_zero;
  };
  std::vector<SweepRow> rows(cfg.sweep_count);

  // round-robin chains: each worker owns an ascending-lambda subsequence and
  // warm-starts within it
  const int jobs = std::max(1, std::min(ctx.jobs, cfg.sweep_count));
  auto worker = [&](int w) {
    std::vector<double> xi = xi0;
    for (int s = w; s < cfg.sweep_count; s += jobs) {
      InferenceProblem problem;
      problem.lambda = lambda0 * std::pow(cfg.sweep_factor, s);
      problem.optimizer = cfg.optimizer;
      FluxTrainingResult res = train_flux(gray, control, cfg.solver, basis, problem, xi);
      xi = res.model.coefficients();

      const fs::path dir = fs::path(ctx.out_dir) / "sweep" / ("lambda_" + std::to_string(s));
      fs::create_directories(dir);
      save_twin_flux(res.model, (dir / "model.json").string());
      write_trace_csv(res.trace, (dir / "trace.csv").string());
      write_training_summary(dir / "summary.json", res.status, res.iterations, res.objective,
                             res.mismatch, res.reg_term, problem.lambda);
      double sum = 0.0;
      int zero = 0;
      for (double v : res.model.coefficients()) {
        sum += v;
        if (v < 1e-8) ++zero;
      }
      rows[s] = SweepRow{s, problem.lambda, res.objective, res.mismatch, res.reg_term, sum,
                         zero};
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  std::ofstream out(fs::path(ctx.out_dir) / "sweep" / "summary.csv");
  out << "index,lambda,objective,mismatch,reg_term,coeff_sum,n_zero\n";
  char buf[224];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.index, r.lambda,
                  r.objective, r.mismatch, r.reg_term, r.coeff_sum, r.n_zero);
    out << buf;
  }
}

}  // namespace twin::cli
