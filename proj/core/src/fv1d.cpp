#include "twinmodel/fv1d.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <vector>

#include "fv_internal.hpp"
#include "twinmodel/errors.hpp"

namespace twin {

namespace {

struct Minmod {
  double value;
  double d_a;  // derivative w.r.t. first argument
  double d_b;
};

// Tie convention: equal-magnitude same-sign slopes follow the left branch.
inline Minmod minmod(double a, double b) {
  if (a * b <= 0.0) return {0.0, 0.0, 0.0};
  if (std::abs(a) <= std::abs(b)) return {a, 1.0, 0.0};
  return {b, 0.0, 1.0};
}

inline double sgn(double z) { return z >= 0.0 ? 1.0 : -1.0; }

struct InterfaceFlux {
  double flux;
  double d_uL;
  double d_uR;
  double u_branch;     // state whose wave speed is active
  double branch_sign;  // sign(F'(u_branch))
  bool branch_left;
};

InterfaceFlux llf_flux(double uL, double uR, const FluxModel& model, bool with_derivs) {
  InterfaceFlux out{};
  const double fL = model.value(uL);
  const double fR = model.value(uR);
  const double dL = model.slope(uL);
  const double dR = model.slope(uR);
  const double aL = std::abs(dL);
  const double aR = std::abs(dR);
  const bool left = aL >= aR;
  const double a = left ? aL : aR;
  out.flux = 0.5 * (fL + fR) - 0.5 * a * (uR - uL);
  out.branch_left = left;
  out.u_branch = left ? uL : uR;
  out.branch_sign = left ? sgn(dL) : sgn(dR);
  if (with_derivs) {
    double da_duL = 0.0, da_duR = 0.0;
    if (left)
      da_duL = out.branch_sign * model.curvature(uL);
    else
      da_duR = out.branch_sign * model.curvature(uR);
    out.d_uL = 0.5 * dL + 0.5 * a - 0.5 * (uR - uL) * da_duL;
    out.d_uR = 0.5 * dR - 0.5 * a - 0.5 * (uR - uL) * da_duR;
  }
  return out;
}

// Minmod slopes (undivided differences) with branch derivatives.
void compute_slopes(std::span<const double> u, Limiter limiter, std::vector<double>& s,
                    std::vector<double>& da, std::vector<double>& db) {
  const int n = static_cast<int>(u.size());
  s.assign(n, 0.0);
  da.assign(n, 0.0);
  db.assign(n, 0.0);
  if (limiter == Limiter::first_order) return;
  for (int i = 0; i < n; ++i) {
    const int im = (i - 1 + n) % n;
    const int ip = (i + 1) % n;
    const Minmod m = minmod(u[i] - u[im], u[ip] - u[i]);
    s[i] = m.value;
    da[i] = m.d_a;
    db[i] = m.d_b;
  }
}

}  // namespace

double numerical_flux(double u_left, double u_right, const FluxModel& model) {
  return llf_flux(u_left, u_right, model, false).flux;
}

ReconstructedStates muscl_reconstruct(std::span<const double> cell_averages, Limiter limiter) {
  const int n = static_cast<int>(cell_averages.size());
  if (n < 1) throw argument_error("muscl_reconstruct: empty input");
  std::vector<double> s, da, db;
  compute_slopes(cell_averages, limiter, s, da, db);
  ReconstructedStates out;
  out.left.resize(n);
  out.right.resize(n);
  for (int f = 0; f < n; ++f) {
    const int cR = (f + 1) % n;
    out.left[f] = cell_averages[f] + 0.5 * s[f];
    out.right[f] = cell_averages[cR] - 0.5 * s[cR];
  }
  return out;
}

namespace fv_internal {

void flux_divergence(std::span<const double> u, const FluxModel& model, const Grid1D& grid,
                     Limiter limiter, std::span<double> out) {
  const int n = grid.n_cells();
  std::vector<double> s, da, db;
  compute_slopes(u, limiter, s, da, db);
  std::fill(out.begin(), out.end(), 0.0);
  for (int f = 0; f < n; ++f) {
    const int cR = (f + 1) % n;
    const double uL = u[f] + 0.5 * s[f];
    const double uR = u[cR] - 0.5 * s[cR];
    const double flux = llf_flux(uL, uR, model, false).flux;
    out[f] += flux / grid.x_width(f);
    out[cR] -= flux / grid.x_width(cR);
  }
}

SpMat flux_divergence_jacobian(std::span<const double> u, const FluxModel& model,
                               const Grid1D& grid, Limiter limiter) {
  const int n = grid.n_cells();
  std::vector<double> s, da, db;
  compute_slopes(u, limiter, s, da, db);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(10) * n);
  for (int f = 0; f < n; ++f) {
    const int cR = (f + 1) % n;
    const double uL = u[f] + 0.5 * s[f];
    const double uR = u[cR] - 0.5 * s[cR];
    const InterfaceFlux lin = llf_flux(uL, uR, model, true);

    // uL depends on cells f-1, f, f+1; uR on cells f, f+1, f+2.
    const int cLm = (f - 1 + n) % n;
    const int cRp = (f + 2) % n;
    const double wL[3] = {-0.5 * da[f], 1.0 + 0.5 * (da[f] - db[f]), 0.5 * db[f]};
    const double wR[3] = {0.5 * da[cR], 1.0 - 0.5 * (da[cR] - db[cR]), -0.5 * db[cR]};
    const int colsL[3] = {cLm, f, cR};
    const int colsR[3] = {f, cR, cRp};

    for (int m = 0; m < 3; ++m) {
      const double v = lin.d_uL * wL[m];
      if (v != 0.0) {
        trip.emplace_back(f, colsL[m], v / grid.x_width(f));
        trip.emplace_back(cR, colsL[m], -v / grid.x_width(cR));
      }
    }
    for (int m = 0; m < 3; ++m) {
      const double v = lin.d_uR * wR[m];
      if (v != 0.0) {
        trip.emplace_back(f, colsR[m], v / grid.x_width(f));
        trip.emplace_back(cR, colsR[m], -v / grid.x_width(cR));
      }
    }
  }
  SpMat jac(n, n);
  jac.setFromTriplets(trip.begin(), trip.end());
  return jac;
}

void flux_divergence_param_vjp(std::span<const double> u, const FluxModel& model,
                               const Grid1D& grid, Limiter limiter, std::span<const double> w,
                               std::span<double> out) {
  const int n = grid.n_cells();
  const int np = model.num_params();
  if (np == 0) return;
  std::vector<double> s, da, db;
  compute_slopes(u, limiter, s, da, db);
  std::vector<double> gL(np), gR(np), gp(np);
  for (int f = 0; f < n; ++f) {
    const int cR = (f + 1) % n;
    const double uL = u[f] + 0.5 * s[f];
    const double uR = u[cR] - 0.5 * s[cR];
    const InterfaceFlux lin = llf_flux(uL, uR, model, false);
    // weight of Fhat_f in sum_i w_i R_i
    const double omega = w[f] / grid.x_width(f) - w[cR] / grid.x_width(cR);
    if (omega == 0.0) continue;
    model.param_value_derivs(uL, gL);
    model.param_value_derivs(uR, gR);
    model.param_slope_derivs(lin.u_branch, gp);
    for (int j = 0; j < np; ++j) {
      const double dflux =
          0.5 * (gL[j] + gR[j]) - 0.5 * (uR - uL) * lin.branch_sign * gp[j];
      out[j] += omega * dflux;
    }
  }
}

double tie_margin(std::span<const double> u, const FluxModel& model, Limiter limiter) {
  const int n = static_cast<int>(u.size());
  double margin = std::numeric_limits<double>::infinity();
  std::vector<double> s, da, db;
  compute_slopes(u, limiter, s, da, db);
  if (limiter != Limiter::first_order) {
    for (int i = 0; i < n; ++i) {
      const int im = (i - 1 + n) % n;
      const int ip = (i + 1) % n;
      const double a = u[i] - u[im];
      const double b = u[ip] - u[i];
      const double m = (a * b > 0.0)
                           ? std::min(std::abs(std::abs(a) - std::abs(b)),
                                      std::min(std::abs(a), std::abs(b)))
                           : std::min(std::abs(a), std::abs(b));
      margin = std::min(margin, m);
    }
  }
  for (int f = 0; f < n; ++f) {
    const int cR = (f + 1) % n;
    const double uL = u[f] + 0.5 * s[f];
    const double uR = u[cR] - 0.5 * s[cR];
    // a wave-speed tie is harmless when the dissipation factor uR - uL
    // vanishes with it (the branch-dependent term is multiplied by zero)
    if (std::abs(uR - uL) <= 1e-12) continue;
    margin = std::min(margin, std::abs(std::abs(model.slope(uL)) - std::abs(model.slope(uR))));
  }
  return margin;
}

}  // namespace fv_internal

std::vector<double> step_crank_nicolson(std::span<const double> u_prev, const FluxModel& model,
                                        std::span<const double> c_prev,
                                        std::span<const double> c_next, double dt,
                                        const Grid1D& grid, const SolverConfig& config,
                                        NewtonTrace* trace) {
  const int n = grid.n_cells();
  if (static_cast<int>(u_prev.size()) != n || static_cast<int>(c_prev.size()) != n ||
      static_cast<int>(c_next.size()) != n)
    throw grid_mismatch_error("step_crank_nicolson: state/control size mismatch");
  if (!(dt > 0.0)) throw argument_error("step_crank_nicolson: dt must be positive");
  if (!(config.newton_tol > 0.0) || config.newton_max_iter < 1)
    throw argument_error("step_crank_nicolson: invalid Newton settings");

  std::vector<double> r_prev(n), r_new(n);
  fv_internal::flux_divergence(u_prev, model, grid, config.limiter, r_prev);

  std::vector<double> v(u_prev.begin(), u_prev.end());
  std::vector<double> residual_trace;
  Eigen::VectorXd res(n);

  for (int iter = 0; iter <= config.newton_max_iter; ++iter) {
    fv_internal::flux_divergence(v, model, grid, config.limiter, r_new);
    double rnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      res(i) = (v[i] - u_prev[i]) / dt + 0.5 * (r_new[i] + r_prev[i]) -
               0.5 * (c_prev[i] + c_next[i]);
      rnorm = std::max(rnorm, std::abs(res(i)));
    }
    residual_trace.push_back(rnorm);
    if (rnorm <= config.newton_tol) {
      if (trace) {
        trace->iterations = iter;
        trace->residual_norms = residual_trace;
      }
      return v;
    }
    if (iter == config.newton_max_iter) break;

    fv_internal::SpMat jac =
        fv_internal::flux_divergence_jacobian(v, model, grid, config.limiter);
    jac *= 0.5;
    for (int i = 0; i < n; ++i) jac.coeffRef(i, i) += 1.0 / dt;
    jac.makeCompressed();
    Eigen::SparseLU<fv_internal::SpMat> lu(jac);
    if (lu.info() != Eigen::Success)
      throw step_error("step_crank_nicolson: singular Newton system", -1, residual_trace);
    Eigen::VectorXd delta = lu.solve(-res);
    for (int i = 0; i < n; ++i) v[i] += delta(i);
  }
  throw step_error("step_crank_nicolson: Newton did not converge", -1, residual_trace);
}

RunRecord solve_spacetime(std::span<const double> u0, std::shared_ptr<const FluxModel> model,
                          ControlField control, GridPtr grid, const SolverConfig& config) {
  if (!grid || !model) throw argument_error("solve_spacetime: grid and model required");
  if (static_cast<int>(u0.size()) != grid->n_cells())
    throw grid_mismatch_error("solve_spacetime: initial condition size mismatch");
  if (!control.grid().same_layout(*grid))
    throw grid_mismatch_error("solve_spacetime: control grid mismatch");

  SpaceTimeField solution(grid);
  std::copy(u0.begin(), u0.end(), solution.row(0).begin());
  std::vector<int> iters;
  iters.reserve(grid->n_time() - 1);

  std::vector<double> u_prev(u0.begin(), u0.end());
  for (int k = 0; k + 1 < grid->n_time(); ++k) {
    NewtonTrace trace;
    std::vector<double> u_next;
    try {
      u_next = step_crank_nicolson(u_prev, *model, control.row(k), control.row(k + 1),
                                   grid->t_step(k), *grid, config, &trace);
    } catch (step_error& e) {
      throw step_error(std::string(e.what()) + " at time index " + std::to_string(k + 1), k + 1,
                       e.residual_trace);
    }
    std::copy(u_next.begin(), u_next.end(), solution.row(k + 1).begin());
    iters.push_back(trace.iterations);
    u_prev = std::move(u_next);
  }
  return RunRecord{grid, std::move(model), std::move(control), config, std::move(solution),
                   std::move(iters)};
}

double total_mass(const RunRecord& run, int k) {
  const Grid1D& g = *run.grid;
  double sum = 0.0;
  for (int i = 0; i < g.n_cells(); ++i) sum += run.solution.at(k, i) * g.x_width(i);
  return sum;
}

double limiter_tie_margin(const RunRecord& run) {
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < run.grid->n_time(); ++k)
    margin = std::min(margin, fv_internal::tie_margin(run.solution.row(k), *run.model,
                                                      run.config.limiter));
  return margin;
}

}  // namespace twin
