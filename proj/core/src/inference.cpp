#include "twinmodel/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "twinmodel/errors.hpp"

namespace twin {

void WeightSet::validate() const {
  if (!(w_rho > 0.0) || !(w_u > 0.0) || !(w_E > 0.0))
    throw argument_error("WeightSet: weights must be positive");
}

void write_trace_csv(std::span<const TrainingTraceEntry> trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("write_trace_csv: cannot open " + path);
  out << "iter,objective,mismatch,reg_term,proj_grad_inf\n";
  char buf[160];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", e.iter, e.objective,
                  e.mismatch, e.reg_term, e.proj_grad_inf);
    out << buf;
  }
}

namespace {

// Small ring buffer pairing objective values with their mismatch/reg split so
// trace callbacks can recover the parts of an accepted evaluation.
struct EvalParts {
  double value, mismatch, reg;
};

class PartsCache {
 public:
  void record(double value, double mismatch, double reg) {
    ring_[next_ % ring_.size()] = {value, mismatch, reg};
    ++next_;
  }
  EvalParts lookup(double value) const {
    for (const auto& e : ring_)
      if (e.value == value) return e;
    return {value, value, 0.0};
  }

 private:
  std::array<EvalParts, 64> ring_{};
  std::size_t next_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// flux training
// ---------------------------------------------------------------------------

namespace {
PartsCache& flux_cache(const FluxTrainingObjective* key) {
  static thread_local const FluxTrainingObjective* owner = nullptr;
  static thread_local PartsCache cache;
  if (owner != key) {
    owner = key;
    cache = PartsCache{};
  }
  return cache;
}
}  // namespace

FluxTrainingObjective::FluxTrainingObjective(const SpaceTimeField& gray, ControlField control,
                                             SolverConfig solver, SigmoidFluxBasis basis,
                                             double lambda)
    : gray_(gray),
      control_(std::move(control)),
      solver_(solver),
      basis_(std::move(basis)),
      lambda_(lambda) {
  if (!(lambda_ >= 0.0)) throw argument_error("FluxTrainingObjective: lambda must be >= 0");
  if (!control_.grid().same_layout(gray_.grid()))
    throw grid_mismatch_error("FluxTrainingObjective: gray/control grid mismatch");
}

bool FluxTrainingObjective::operator()(std::span<const double> xi, double& value,
                                       std::span<double> grad) const {
  try {
    auto model = std::make_shared<TwinFlux>(basis_, std::vector<double>(xi.begin(), xi.end()));
    RunRecord run =
        solve_spacetime(gray_.row(0), model, control_, gray_.grid_ptr(), solver_);
    double mism = 0.0;
    std::vector<double> g = adjoint_gradient_wrt_params_mismatch(run, gray_, &mism);
    double reg = 0.0;
    for (double x : xi) reg += x;  // |xi|_1 on the nonnegative orthant
    reg *= lambda_;
    value = mism + reg;
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = g[j] + lambda_;
    last_mismatch_ = mism;
    last_reg_ = reg;
    flux_cache(this).record(value, mism, reg);
    return true;
  } catch (const error&) {
    return false;
  }
}

std::optional<double> FluxTrainingObjective::mismatch(std::span<const double> xi) const {
  try {
    auto model = std::make_shared<TwinFlux>(basis_, std::vector<double>(xi.begin(), xi.end()));
    RunRecord run =
        solve_spacetime(gray_.row(0), model, control_, gray_.grid_ptr(), solver_);
    return mismatch_spacetime(run.solution, gray_);
  } catch (const error&) {
    return std::nullopt;
  }
}

std::vector<double> initial_flux_guess(const SpaceTimeField& gray,
                                       const SigmoidFluxBasis& basis) {
  const Grid1D& g = gray.grid();
  const int n = g.n_cells();
  const int nt = g.n_time();
  const int m = basis.size();
  const double spacing =
      m > 1 ? basis.center(1) - basis.center(0) : 2.0 * basis.width();

  // local speed estimates s = -u_t/u_x where the spatial slope is usable
  std::vector<std::pair<double, double>> samples;  // (u, speed)
  double ux_scale = 0.0;
  for (int k = 1; k + 1 < nt; ++k)
    for (int i = 0; i < n; ++i) {
      const int im = (i - 1 + n) % n, ip = (i + 1) % n;
      ux_scale = std::max(ux_scale, std::abs(gray.at(k, ip) - gray.at(k, im)) /
                                        (g.x_width(i) * 2.0));
    }
  const double ux_min = 0.05 * ux_scale;
  for (int k = 1; k + 1 < nt; ++k) {
    const double dt2 = g.t_point(k + 1) - g.t_point(k - 1);
    for (int i = 0; i < n; ++i) {
      const int im = (i - 1 + n) % n, ip = (i + 1) % n;
      const double ux = (gray.at(k, ip) - gray.at(k, im)) / (g.x_width(i) * 2.0);
      if (std::abs(ux) <= ux_min || ux_min == 0.0) continue;
      const double ut = (gray.at(k + 1, i) - gray.at(k - 1, i)) / dt2;
      const double s = std::clamp(-ut / ux, 0.0, 5.0);
      samples.emplace_back(gray.at(k, i), s);
    }
  }

  std::vector<double> xi(m, 0.05 * spacing);
  if (samples.size() < 16) return xi;

  // ridge least squares: sum_k xi_k g'_k(u_d) ~ s_d
  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(m);
  std::vector<double> gp(m);
  for (const auto& [u, s] : samples) {
    basis.eval_slope(u, gp);
    for (int a = 0; a < m; ++a) {
      atb(a) += gp[a] * s;
      for (int b = 0; b < m; ++b) ata(a, b) += gp[a] * gp[b];
    }
  }
  const double ridge = 1e-6 * ata.trace() / m + 1e-12;
  for (int a = 0; a < m; ++a) ata(a, a) += ridge;
  Eigen::VectorXd sol = ata.ldlt().solve(atb);
  for (int a = 0; a < m; ++a) xi[a] = std::max(sol(a), 0.0);
  if (*std::max_element(xi.begin(), xi.end()) <= 0.0) xi.assign(m, 0.05 * spacing);
  return xi;
}

double relative_lambda(const FluxTrainingObjective& objective, std::span<const double> xi0,
                       double scale) {
  const auto m0 = objective.mismatch(xi0);
  if (!m0) throw argument_error("relative_lambda: forward solve failed at the initial guess");
  return scale * std::max(*m0, std::numeric_limits<double>::min());
}

FluxTrainingResult train_flux(const SpaceTimeField& gray, const ControlField& control,
                              const SolverConfig& solver, const SigmoidFluxBasis& basis,
                              const InferenceProblem& problem, std::span<const double> xi0) {
  FluxTrainingObjective objective(gray, control, solver, basis, problem.lambda);
  const int m = basis.size();
  std::vector<double> lower(m, 0.0), upper(m, std::numeric_limits<double>::infinity());

  std::vector<TrainingTraceEntry> trace;
  auto callback = [&](const LbfgsTraceEntry& e, std::span<const double>) {
    const EvalParts parts = flux_cache(&objective).lookup(e.f);
    trace.push_back({e.iter, e.f, parts.mismatch, parts.reg, e.proj_grad_inf});
  };

  LbfgsResult res = minimize_bounded(
      [&](std::span<const double> x, double& f, std::span<double> g) {
        return objective(x, f, g);
      },
      std::vector<double>(xi0.begin(), xi0.end()), lower, upper, problem.optimizer, callback);

  FluxTrainingResult out{TwinFlux(basis, res.x), res.status, res.iterations,
                         res.f, 0.0, 0.0, std::move(trace)};
  const EvalParts parts = flux_cache(&objective).lookup(res.f);
  out.mismatch = parts.mismatch;
  out.reg_term = parts.reg;
  return out;
}

// ---------------------------------------------------------------------------
// steady EOS inference
// ---------------------------------------------------------------------------

NozzleState state_from_fields(const std::array<SteadyField, 3>& fields, GridPtr grid,
                              const FlowBc& bc) {
  NozzleState st(grid, bc);
  for (int i = 0; i < st.n_cells(); ++i) {
    const double r = fields[0].at(i);
    const double u = fields[1].at(i);
    const double e_m = fields[2].at(i);
    st.raw()[3 * i] = r;
    st.raw()[3 * i + 1] = r * u;
    st.raw()[3 * i + 2] = r * e_m;
  }
  return st;
}

WeightSet weights_from_samples(std::span<const double> rho_norms,
                               std::span<const double> u_norms,
                               std::span<const double> e_norms) {
  if (rho_norms.empty() || u_norms.empty() || e_norms.empty())
    throw calibration_error("weights_from_samples: no surviving samples");
  auto mean = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double mr = mean(rho_norms), mu = mean(u_norms), me = mean(e_norms);
  if (!(mr > 0.0) || !(mu > 0.0) || !(me > 0.0))
    throw calibration_error("weights_from_samples: zero average mismatch (division guarded)");
  return WeightSet{1.0 / mr, 1.0 / mu, 1.0 / me};
}

WeightSet calibrate_weights(const std::array<SteadyField, 3>& gray_fields,
                            const ParamEos& skeleton, const NozzleSetup& setup, int n_random,
                            std::uint64_t seed) {
  if (n_random < 2) throw argument_error("calibrate_weights: n_random >= 2 required");
  const Grid1D& g = *setup.grid;
  const int n = g.n_cells();

  // pressure scale from the boundary data (the gray pressure itself is the
  // unknown); alpha-bar matches it to the mean basis response over the cloud
  const double p_bar = 0.5 * (setup.bc.p_total_in + setup.bc.p_out);
  const int np_alpha = skeleton.n_rho() * skeleton.n_u();
  std::vector<double> pa(np_alpha + 1);
  double basis_mean = 0.0;
  NozzleState gray_state = state_from_fields(gray_fields, setup.grid, setup.bc);
  for (int i = 0; i < n; ++i) {
    const auto [rho_dim, u_dim] = gray_state.state_point(i);
    skeleton.param_derivs(rho_dim, u_dim, pa);
    double s = 0.0;
    for (int j = 0; j < np_alpha; ++j) s += pa[j];
    basis_mean += s;
  }
  basis_mean /= n;
  if (!(basis_mean > 1e-12)) throw calibration_error("calibrate_weights: flat basis response");
  const double alpha_bar = p_bar / basis_mean;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u_alpha(0.0, 2.0 * alpha_bar);
  std::uniform_real_distribution<double> u_p0(0.0, p_bar);

  std::vector<double> norms_r, norms_u, norms_e;
  for (int s = 0; s < n_random; ++s) {
    std::vector<double> alpha(np_alpha);
    for (double& a : alpha) a = u_alpha(rng);
    const double p0 = u_p0(rng);
    try {
      ParamEos guess(skeleton.rho_centers(), skeleton.u_centers(), skeleton.sigma_rho(),
                     skeleton.sigma_u(), std::move(alpha), p0);
      SteadyResult run =
          solve_steady(guess, setup.area, setup.bc, setup.grid, setup.config, &gray_state);
      const auto twin = run.state.to_fields();
      double nr = 0.0, nu = 0.0, ne = 0.0;
      for (int i = 0; i < n; ++i) {
        const double dx = g.x_width(i);
        nr += dx * (twin[0].at(i) - gray_fields[0].at(i)) * (twin[0].at(i) - gray_fields[0].at(i));
        nu += dx * (twin[1].at(i) - gray_fields[1].at(i)) * (twin[1].at(i) - gray_fields[1].at(i));
        ne += dx * (twin[2].at(i) - gray_fields[2].at(i)) * (twin[2].at(i) - gray_fields[2].at(i));
      }
      norms_r.push_back(nr);
      norms_u.push_back(nu);
      norms_e.push_back(ne);
    } catch (const error&) {
      continue;  // diverging guesses are skipped
    }
  }
  if (norms_r.empty()) throw calibration_error("calibrate_weights: all random solves diverged");
  return weights_from_samples(norms_r, norms_u, norms_e);
}

std::vector<double> recover_pressure_from_momentum(const std::array<SteadyField, 3>& gray_fields,
                                                   const BsplineArea& area, const FlowBc& bc) {
  const Grid1D& g = gray_fields[0].grid();
  const int n = g.n_cells();
  if (n < 2) throw argument_error("recover_pressure_from_momentum: at least two cells");
  bc.validate();

  // nondimensional momentum transport rho u^2 A per cell and face areas
  std::vector<double> m(n), face(n + 1);
  double edge = g.x_center(0) - 0.5 * g.x_width(0);
  face[0] = area.area_at(std::max(edge, area.x_min()));
  for (int i = 0; i < n; ++i) {
    edge += g.x_width(i);
    face[i + 1] = area.area_at(std::min(edge, area.x_max()));
    const double r = gray_fields[0].at(i), u = gray_fields[1].at(i);
    m[i] = r * u * u * area.area_at(g.x_center(i));
  }

  // p_i = p_{i+1} + (m_{i+1} - m_i)/A_{i+1/2}, anchored at the outlet BC
  std::vector<double> p(n);
  p[n - 1] = bc.p_out / bc.p_total_in;
  for (int i = n - 2; i >= 0; --i) p[i] = p[i + 1] + (m[i + 1] - m[i]) / face[i + 1];
  for (double& v : p) v *= bc.p_total_in;  // dimensional
  return p;
}

ParamEos initial_eos_guess(const ParamEos& skeleton,
                           std::span<const std::array<double, 2>> state_cloud,
                           std::span<const double> pressures) {
  if (state_cloud.empty()) throw argument_error("initial_eos_guess: empty state cloud");
  if (pressures.size() != state_cloud.size())
    throw argument_error("initial_eos_guess: pressure/cloud size mismatch");
  const int nr = skeleton.n_rho(), nu = skeleton.n_u();
  const int na = nr * nu;
  const std::size_t nc = state_cloud.size();

  double u_mean = 0.0, p_mean = 0.0;
  for (std::size_t s = 0; s < nc; ++s) {
    u_mean += state_cloud[s][1];
    p_mean += pressures[s];
  }
  u_mean /= static_cast<double>(nc);
  p_mean /= static_cast<double>(nc);
  if (!(std::abs(p_mean) > 0.0)) throw argument_error("initial_eos_guess: zero pressure scale");

  // target dp/dU slope from the p(U) trend of the cloud
  double cov = 0.0, var = 0.0;
  for (std::size_t s = 0; s < nc; ++s) {
    cov += (state_cloud[s][1] - u_mean) * (pressures[s] - p_mean);
    var += (state_cloud[s][1] - u_mean) * (state_cloud[s][1] - u_mean);
  }
  const double rho_lo = skeleton.rho_centers().front(), rho_hi = skeleton.rho_centers().back();
  const double u_lo = skeleton.u_centers().front(), u_hi = skeleton.u_centers().back();
  const double rho_span = std::max(rho_hi - rho_lo, skeleton.sigma_rho());
  const double u_span = std::max(u_hi - u_lo, skeleton.sigma_u());
  double slope = var > 0.0 ? cov / var : 0.0;
  slope = std::max(slope, 0.05 * std::abs(p_mean) / u_span);

  // Shaped nonnegative least squares (solved with the project's own bound-
  // constrained L-BFGS): match the recovered pressures on the cloud, and keep
  // the surface derivatives tame on a padded band lattice. The derivative
  // shaping is what keeps the twin's own steady solve well-posed: the data
  // cloud is a thin curve, so an unshaped fit is free to put violent dp/drho
  // oscillations right where the solver has to operate.
  struct Row {
    std::vector<double> phi;  // na alpha columns (+ implicit p0 column)
    double target;
    double weight;
    bool has_p0;
  };
  std::vector<Row> rows;
  rows.reserve(nc + 200);

  std::vector<double> rb(nr), rs(nr), sb(nu), ss(nu);
  auto basis_all = [&](double rho, double u) {
    for (int i = 0; i < nr; ++i) {
      const double d = rho - skeleton.rho_centers()[i];
      rb[i] = std::exp(-d * d / skeleton.sigma_rho());
      rs[i] = -2.0 * d / skeleton.sigma_rho() * rb[i];
    }
    for (int j = 0; j < nu; ++j) {
      const double t = std::tanh((u - skeleton.u_centers()[j]) / skeleton.sigma_u());
      sb[j] = 0.5 * (t + 1.0);
      ss[j] = (1.0 - t * t) / (2.0 * skeleton.sigma_u());
    }
  };

  const double inv_p = 1.0 / std::abs(p_mean);
  for (std::size_t s = 0; s < nc; ++s) {
    basis_all(state_cloud[s][0], state_cloud[s][1]);
    Row r;
    r.phi.resize(na);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nu; ++j) r.phi[i * nu + j] = rb[i] * sb[j] * inv_p;
    r.target = pressures[s] * inv_p;
    r.weight = 1.0;
    r.has_p0 = true;
    rows.push_back(std::move(r));
  }
  const int n_lat = 17;
  const double shape_w = 2.0 / (n_lat * n_lat);
  for (int a = 0; a < n_lat; ++a) {
    const double rho = rho_lo - 0.3 * rho_span + 1.6 * rho_span * a / (n_lat - 1);
    for (int b = 0; b < n_lat; ++b) {
      const double u = u_lo - 0.3 * u_span + 1.6 * u_span * b / (n_lat - 1);
      basis_all(rho, u);
      Row dr;  // dp/drho ~ 0 over the band
      dr.phi.resize(na);
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nu; ++j) dr.phi[i * nu + j] = rs[i] * sb[j] * rho_span * inv_p;
      dr.target = 0.0;
      dr.weight = shape_w;
      dr.has_p0 = false;
      rows.push_back(std::move(dr));
      Row du;  // dp/dU ~ data slope over the band
      du.phi.resize(na);
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nu; ++j) du.phi[i * nu + j] = rb[i] * ss[j] * u_span * inv_p;
      du.target = slope * u_span * inv_p;
      du.weight = shape_w;
      du.has_p0 = false;
      rows.push_back(std::move(du));
    }
  }

  const double ridge = 1e-10;
  auto objective = [&](std::span<const double> theta, double& f, std::span<double> g) {
    f = 0.0;
    std::fill(g.begin(), g.end(), 0.0);
    const double p0 = theta[na];
    for (const Row& r : rows) {
      double pred = r.has_p0 ? p0 * inv_p : 0.0;
      for (int k = 0; k < na; ++k) pred += r.phi[k] * theta[k];
      const double resid = pred - r.target;
      f += r.weight * resid * resid;
      const double c = 2.0 * r.weight * resid;
      for (int k = 0; k < na; ++k) g[k] += c * r.phi[k];
      if (r.has_p0) g[na] += c * inv_p;
    }
    for (int k = 0; k < na; ++k) {
      f += ridge * theta[k] * theta[k];
      g[k] += 2.0 * ridge * theta[k];
    }
    return true;
  };

  // start from a constant-slope staircase (feasible and roughly scaled)
  std::vector<double> theta(na + 1, 0.0);
  {
    double c_r = 0.0;
    for (std::size_t s = 0; s < nc; ++s) {
      basis_all(state_cloud[s][0], state_cloud[s][1]);
      for (int i = 0; i < nr; ++i) c_r += rb[i];
    }
    c_r /= static_cast<double>(nc);
    const double spacing = nu > 1 ? (u_hi - u_lo) / (nu - 1) : skeleton.sigma_u();
    const double beta = slope * spacing / std::max(c_r, 1e-12);
    std::fill(theta.begin(), theta.end() - 1, beta);
    theta[na] = 0.0;
  }
  std::vector<double> lower(na + 1, 0.0), upper(na + 1, std::numeric_limits<double>::infinity());
  lower[na] = -std::numeric_limits<double>::infinity();
  LbfgsOptions opt;
  opt.max_iters = 600;
  opt.grad_tol = 1e-12;
  LbfgsResult fit = minimize_bounded(objective, theta, lower, upper, opt);

  return ParamEos(skeleton.rho_centers(), skeleton.u_centers(), skeleton.sigma_rho(),
                  skeleton.sigma_u(), std::vector<double>(fit.x.begin(), fit.x.end() - 1),
                  fit.x.back());
}

ParamEos initial_eos_guess(const ParamEos& skeleton,
                           std::span<const std::array<double, 2>> state_cloud, double gamma) {
  std::vector<double> pressures(state_cloud.size());
  for (std::size_t s = 0; s < state_cloud.size(); ++s)
    pressures[s] = (gamma - 1.0) * state_cloud[s][1];
  return initial_eos_guess(skeleton, state_cloud, pressures);
}

EosHomotopyAnchor make_homotopy_anchor(std::span<const std::array<double, 2>> state_cloud,
                                       std::span<const double> pressures) {
  if (state_cloud.empty() || pressures.size() != state_cloud.size())
    throw argument_error("make_homotopy_anchor: inconsistent cloud/pressures");
  EosHomotopyAnchor a;
  double u_mean = 0.0, p_mean = 0.0;
  for (std::size_t s = 0; s < state_cloud.size(); ++s) {
    u_mean += state_cloud[s][1];
    p_mean += pressures[s];
  }
  u_mean /= static_cast<double>(state_cloud.size());
  p_mean /= static_cast<double>(state_cloud.size());
  double cov = 0.0, var = 0.0;
  for (std::size_t s = 0; s < state_cloud.size(); ++s) {
    cov += (state_cloud[s][1] - u_mean) * (pressures[s] - p_mean);
    var += (state_cloud[s][1] - u_mean) * (state_cloud[s][1] - u_mean);
  }
  a.u_ref = u_mean;
  a.p_ref = p_mean;
  a.slope = var > 0.0 ? std::max(cov / var, 0.05 * std::abs(p_mean) / std::sqrt(var)) : 0.4;
  return a;
}

namespace {

// (1-h) * anchor surface + h * full state equation
class BlendedEos final : public StateEquation {
 public:
  BlendedEos(const StateEquation& inner, const EosHomotopyAnchor& anchor, double h)
      : inner_(inner), anchor_(anchor), h_(h) {}
  EosEval evaluate(double rho, double U) const override {
    const EosEval e = inner_.evaluate(rho, U);
    const double pl = anchor_.p_ref + anchor_.slope * (U - anchor_.u_ref);
    return {h_ * e.p + (1.0 - h_) * pl, h_ * e.dp_drho,
            h_ * e.dp_dU + (1.0 - h_) * anchor_.slope};
  }
  std::string name() const override { return "blended"; }

 private:
  const StateEquation& inner_;
  EosHomotopyAnchor anchor_;
  double h_;
};

}  // namespace

SteadyResult solve_steady_robust(const StateEquation& eos, const NozzleSetup& setup,
                                 const NozzleState* warm_start,
                                 const EosHomotopyAnchor& anchor) {
  try {
    return solve_steady(eos, setup.area, setup.bc, setup.grid, setup.config, warm_start);
  } catch (const convergence_error&) {
    // fall through to the homotopy ladder
  }
  double h = 0.0, step = 0.25;
  SteadyResult current = [&] {
    BlendedEos start(eos, anchor, 0.0);
    return solve_steady(start, setup.area, setup.bc, setup.grid, setup.config, warm_start);
  }();
  while (h < 1.0) {
    const double h_next = std::min(h + step, 1.0);
    try {
      BlendedEos blend(eos, anchor, h_next);
      SteadyResult next = solve_steady(blend, setup.area, setup.bc, setup.grid, setup.config,
                                       &current.state);
      current = std::move(next);
      h = h_next;
      step = std::min(step * 2.0, 0.25);
    } catch (const convergence_error& e) {
      step *= 0.5;
      if (step < 1.0 / 256.0)
        throw convergence_error(
            std::string("solve_steady_robust: homotopy stalled at h=") + std::to_string(h),
            e.residual_history);
    }
  }
  return current;
}

namespace {
PartsCache& eos_cache(const EosTrainingObjective* key) {
  static thread_local const EosTrainingObjective* owner = nullptr;
  static thread_local PartsCache cache;
  if (owner != key) {
    owner = key;
    cache = PartsCache{};
  }
  return cache;
}
}  // namespace

EosTrainingObjective::EosTrainingObjective(const std::array<SteadyField, 3>& gray_fields,
                                           ParamEos skeleton, NozzleSetup setup,
                                           WeightSet weights, double lambda,
                                           const NozzleState* warm_start)
    : gray_(gray_fields),
      eos_(std::move(skeleton)),
      setup_(std::move(setup)),
      weights_(weights),
      lambda_(lambda),
      warm_start_(warm_start) {
  weights_.validate();
  if (!(lambda_ >= 0.0)) throw argument_error("EosTrainingObjective: lambda must be >= 0");
  // homotopy anchor from the gray data's own recovered pressure trend
  const std::vector<double> prec =
      recover_pressure_from_momentum(gray_, setup_.area, setup_.bc);
  NozzleState gs = state_from_fields(gray_, setup_.grid, setup_.bc);
  std::vector<std::array<double, 2>> cloud(gs.n_cells());
  for (int i = 0; i < gs.n_cells(); ++i) cloud[i] = gs.state_point(i);
  anchor_ = make_homotopy_anchor(cloud, prec);
}

bool EosTrainingObjective::operator()(std::span<const double> params, double& value,
                                      std::span<double> grad) const {
  try {
    eos_.set_params(params);
    SteadyResult run = solve_steady_robust(eos_, setup_, warm_start_, anchor_);
    double mism = 0.0;
    const double w[3] = {weights_.w_rho, weights_.w_u, weights_.w_E};
    std::vector<double> g = adjoint_gradient_wrt_eos_params(
        run.state, gray_, w, eos_, setup_.area, setup_.bc, setup_.config, &mism);
    double reg = 0.0;
    const std::size_t na = params.size() - 1;  // p0 carries no L1 term
    for (std::size_t j = 0; j < na; ++j) reg += params[j];
    reg *= lambda_;
    value = mism + reg;
    for (std::size_t j = 0; j < grad.size(); ++j)
      grad[j] = g[j] + (j < na ? lambda_ : 0.0);
    last_mismatch_ = mism;
    last_reg_ = reg;
    eos_cache(this).record(value, mism, reg);
    return true;
  } catch (const error&) {
    return false;
  }
}

EosTrainingResult train_eos(const std::array<SteadyField, 3>& gray_fields, const ParamEos& start,
                            const NozzleSetup& setup, const WeightSet& weights,
                            const InferenceProblem& problem, const NozzleState* warm_start) {
  EosTrainingObjective objective(gray_fields, start, setup, weights, problem.lambda, warm_start);
  const int np = start.num_params();
  std::vector<double> lower(np, 0.0), upper(np, std::numeric_limits<double>::infinity());
  lower.back() = -std::numeric_limits<double>::infinity();  // p0 free

  std::vector<TrainingTraceEntry> trace;
  auto callback = [&](const LbfgsTraceEntry& e, std::span<const double>) {
    const EvalParts parts = eos_cache(&objective).lookup(e.f);
    trace.push_back({e.iter, e.f, parts.mismatch, parts.reg, e.proj_grad_inf});
  };

  LbfgsResult res = minimize_bounded(
      [&](std::span<const double> x, double& f, std::span<double> g) {
        return objective(x, f, g);
      },
      start.packed_params(), lower, upper, problem.optimizer, callback);

  ParamEos model(start.rho_centers(), start.u_centers(), start.sigma_rho(), start.sigma_u(),
                 std::vector<double>(res.x.begin(), res.x.end() - 1), res.x.back());
  EosTrainingResult out{std::move(model), res.status, res.iterations, res.f, 0.0, 0.0,
                        std::move(trace)};
  const EvalParts parts = eos_cache(&objective).lookup(res.f);
  out.mismatch = parts.mismatch;
  out.reg_term = parts.reg;
  return out;
}

// ---------------------------------------------------------------------------
// recovery quality
// ---------------------------------------------------------------------------

RecoveryReport flux_recovery_report(const FluxModel& trained, const FluxModel& truth,
                                    Interval excited, Interval ambient, int n_samples) {
  if (!(n_samples > 1)) throw argument_error("flux_recovery_report: n_samples > 1 required");
  RecoveryReport rep;
  double in_d2 = 0.0, in_t2 = 0.0, in_dmax = 0.0, in_tmax = 0.0;
  double out_d2 = 0.0, out_t2 = 0.0, out_dmax = 0.0, out_tmax = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const double u = ambient.lo + ambient.width() * s / (n_samples - 1);
    const double d = trained.slope(u) - truth.slope(u);
    const double t = truth.slope(u);
    if (excited.contains(u)) {
      in_d2 += d * d;
      in_t2 += t * t;
      in_dmax = std::max(in_dmax, std::abs(d));
      in_tmax = std::max(in_tmax, std::abs(t));
      ++rep.n_in;
    } else {
      out_d2 += d * d;
      out_t2 += t * t;
      out_dmax = std::max(out_dmax, std::abs(d));
      out_tmax = std::max(out_tmax, std::abs(t));
      ++rep.n_out;
    }
  }
  rep.in_rel_l2 = in_t2 > 0.0 ? std::sqrt(in_d2 / in_t2) : 0.0;
  rep.in_sup = in_tmax > 0.0 ? in_dmax / in_tmax : 0.0;
  rep.out_rel_l2 = out_t2 > 0.0 ? std::sqrt(out_d2 / out_t2) : 0.0;
  rep.out_sup = out_tmax > 0.0 ? out_dmax / out_tmax : 0.0;
  return rep;
}

RecoveryReport eos_recovery_report(const StateEquation& trained, const StateEquation& truth,
                                   const StateHull& hull, Interval rho_range, Interval u_range,
                                   int n_rho, int n_u) {
  RecoveryReport rep;
  double in_d2 = 0.0, in_t2 = 0.0, in_dmax = 0.0, in_tmax = 0.0;
  double out_d2 = 0.0, out_t2 = 0.0, out_dmax = 0.0, out_tmax = 0.0;
  for (int a = 0; a < n_rho; ++a) {
    const double rho = rho_range.lo + rho_range.width() * a / std::max(n_rho - 1, 1);
    for (int b = 0; b < n_u; ++b) {
      const double u = u_range.lo + u_range.width() * b / std::max(n_u - 1, 1);
      double pt, pe;
      try {
        pt = truth.pressure(rho, u);
        pe = trained.pressure(rho, u);
      } catch (const domain_error&) {
        continue;  // lattice point outside the truth model's validity
      }
      const double d = pe - pt;
      if (hull.contains(rho, u)) {
        in_d2 += d * d;
        in_t2 += pt * pt;
        in_dmax = std::max(in_dmax, std::abs(d));
        in_tmax = std::max(in_tmax, std::abs(pt));
        ++rep.n_in;
      } else {
        out_d2 += d * d;
        out_t2 += pt * pt;
        out_dmax = std::max(out_dmax, std::abs(d));
        out_tmax = std::max(out_tmax, std::abs(pt));
        ++rep.n_out;
      }
    }
  }
  rep.in_rel_l2 = in_t2 > 0.0 ? std::sqrt(in_d2 / in_t2) : 0.0;
  rep.in_sup = in_tmax > 0.0 ? in_dmax / in_tmax : 0.0;
  rep.out_rel_l2 = out_t2 > 0.0 ? std::sqrt(out_d2 / out_t2) : 0.0;
  rep.out_sup = out_tmax > 0.0 ? out_dmax / out_tmax : 0.0;
  return rep;
}

double recovered_range_width(const FluxModel& trained, const FluxModel& truth, Interval ambient,
                             double rel_tol, int n_samples) {
  double tmax = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const double u = ambient.lo + ambient.width() * s / (n_samples - 1);
    tmax = std::max(tmax, std::abs(truth.slope(u)));
  }
  if (tmax == 0.0) return 0.0;
  int good = 0;
  for (int s = 0; s < n_samples; ++s) {
    const double u = ambient.lo + ambient.width() * s / (n_samples - 1);
    if (std::abs(trained.slope(u) - truth.slope(u)) <= rel_tol * tmax) ++good;
  }
  return ambient.width() * good / n_samples;
}

}  // namespace twin
