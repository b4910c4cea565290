#include "twinmodel/adjoint.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fv_internal.hpp"
#include "twinmodel/errors.hpp"

namespace twin {

namespace {

using fv_internal::SpMat;

// Row-wise partials of the discrete objective; adapters let the same reverse
// sweep serve both the CLI objective and the training mismatch.
class RowObjective {
 public:
  virtual ~RowObjective() = default;
  virtual void du_row(const RunRecord& run, int k, std::span<double> out) const = 0;
  virtual void dc_row(const RunRecord& run, int k, std::span<double> out) const = 0;
};

class SpecRow final : public RowObjective {
 public:
  explicit SpecRow(const ObjectiveSpec& spec) : spec_(spec) {}
  void du_row(const RunRecord& run, int k, std::span<double> out) const override {
    const Grid1D& g = *run.grid;
    for (int i = 0; i < g.n_cells(); ++i)
      out[i] = spec_.dj_du(run.solution.at(k, i), run.control.at(k, i)) * g.t_weight(k) *
               g.x_width(i);
  }
  void dc_row(const RunRecord& run, int k, std::span<double> out) const override {
    const Grid1D& g = *run.grid;
    for (int i = 0; i < g.n_cells(); ++i)
      out[i] = spec_.dj_dc(run.solution.at(k, i), run.control.at(k, i)) * g.t_weight(k) *
               g.x_width(i);
  }

 private:
  ObjectiveSpec spec_;
};

class MismatchRow final : public RowObjective {
 public:
  explicit MismatchRow(const SpaceTimeField& gray) : gray_(gray) {}
  void du_row(const RunRecord& run, int k, std::span<double> out) const override {
    const Grid1D& g = *run.grid;
    for (int i = 0; i < g.n_cells(); ++i)
      out[i] = 2.0 * (run.solution.at(k, i) - gray_.at(k, i)) * g.t_weight(k) * g.x_width(i) /
               g.horizon();
  }
  void dc_row(const RunRecord&, int, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
  }

 private:
  const SpaceTimeField& gray_;
};

void check_run(const RunRecord& run) {
  if (!run.grid || !run.model) throw state_error("adjoint: run record missing grid or model");
  if (static_cast<int>(run.solution.values().size()) !=
      run.grid->n_time() * run.grid->n_cells())
    throw state_error("adjoint: run record missing stored states");
}

SpMat step_matrix(const RunRecord& run, int row, double h) {
  // I/h + 1/2 J(u^row)
  SpMat jac = fv_internal::flux_divergence_jacobian(run.solution.row(row), *run.model,
                                                    *run.grid, run.config.limiter);
  jac *= 0.5;
  for (int i = 0; i < run.grid->n_cells(); ++i) jac.coeffRef(i, i) += 1.0 / h;
  jac.makeCompressed();
  return jac;
}

// Adjoint states lambda_1..lambda_M (lambda_k multiplies the step producing
// row k); index 0 is kept zero so that lambda[k] lines up with row k.
std::vector<Eigen::VectorXd> reverse_sweep(const RunRecord& run, const RowObjective& obj) {
  check_run(run);
  const Grid1D& g = *run.grid;
  const int n = g.n_cells();
  const int m = g.n_time() - 1;  // number of steps
  std::vector<Eigen::VectorXd> lambda(m + 1, Eigen::VectorXd::Zero(n));
  if (m == 0) return lambda;

  std::vector<double> row(n);
  Eigen::VectorXd carry(n);
  obj.du_row(run, m, row);
  for (int i = 0; i < n; ++i) carry(i) = row[i];

  for (int k = m - 1; k >= 0; --k) {
    const double h = g.t_step(k);
    SpMat a = step_matrix(run, k + 1, h);
    SpMat at = a.transpose();
    Eigen::SparseLU<SpMat> lu(at);
    if (lu.info() != Eigen::Success)
      throw state_error("adjoint: singular transposed step matrix");
    lambda[k + 1] = lu.solve(-carry);

    if (k > 0) {
      // carry = g_k + B_k^T lambda_{k+1},  B_k = -I/h + 1/2 J(u^k)
      SpMat jk = fv_internal::flux_divergence_jacobian(run.solution.row(k), *run.model, g,
                                                       run.config.limiter);
      obj.du_row(run, k, row);
      Eigen::VectorXd gk(n);
      for (int i = 0; i < n; ++i) gk(i) = row[i];
      carry = gk + 0.5 * (jk.transpose() * lambda[k + 1]) - lambda[k + 1] / h;
    }
  }
  return lambda;
}

ControlField control_gradient(const RunRecord& run, const RowObjective& obj) {
  const Grid1D& g = *run.grid;
  const int n = g.n_cells();
  const int m = g.n_time() - 1;
  auto lambda = reverse_sweep(run, obj);

  ControlField grad(run.grid);
  std::vector<double> row(n);
  for (int k = 0; k <= m; ++k) {
    obj.dc_row(run, k, row);
    for (int i = 0; i < n; ++i) {
      double v = row[i];
      if (k >= 1) v -= 0.5 * lambda[k](i);
      if (k + 1 <= m) v -= 0.5 * lambda[k + 1](i);
      grad.at(k, i) = v;
    }
  }
  return grad;
}

std::vector<double> param_gradient(const RunRecord& run, const RowObjective& obj) {
  const Grid1D& g = *run.grid;
  const int n = g.n_cells();
  const int m = g.n_time() - 1;
  const int np = run.model->num_params();
  auto lambda = reverse_sweep(run, obj);

  std::vector<double> grad(np, 0.0);
  std::vector<double> w(n), half(np);
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < n; ++i) w[i] = 0.5 * lambda[k + 1](i);
    fv_internal::flux_divergence_param_vjp(run.solution.row(k + 1), *run.model, g,
                                           run.config.limiter, w, grad);
    fv_internal::flux_divergence_param_vjp(run.solution.row(k), *run.model, g,
                                           run.config.limiter, w, grad);
  }
  return grad;
}

}  // namespace

GradientReport GradientReport::compare(std::vector<double> gradient,
                                       std::vector<double> reference,
                                       std::string provenance_twin,
                                       std::string provenance_reference) {
  GradientReport rep;
  rep.gradient = std::move(gradient);
  rep.reference = std::move(reference);
  rep.provenance_twin = std::move(provenance_twin);
  rep.provenance_reference = std::move(provenance_reference);
  if (!rep.reference.empty()) {
    if (rep.reference.size() != rep.gradient.size())
      throw argument_error("GradientReport: gradient/reference size mismatch");
    double diff2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < rep.gradient.size(); ++i) {
      const double d = rep.gradient[i] - rep.reference[i];
      rep.linf_err = std::max(rep.linf_err, std::abs(d));
      diff2 += d * d;
      ref2 += rep.reference[i] * rep.reference[i];
    }
    rep.rel_l2_err = ref2 > 0.0 ? std::sqrt(diff2 / ref2)
                                : (diff2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  return rep;
}

void GradientReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw io_error("GradientReport::write_csv: cannot open " + path);
  out << "index,grad_twin,grad_reference,abs_err\n";
  char buf[128];
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    if (!reference.empty()) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, gradient[i], reference[i],
                    std::abs(gradient[i] - reference[i]));
    } else {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,,\n", i, gradient[i]);
    }
    out << buf;
  }
}

void GradientReport::write_summary_json(const std::string& path) const {
  nlohmann::ordered_json j;
  j["linf_err"] = linf_err;
  j["rel_l2_err"] = rel_l2_err;
  j["provenance_twin"] = provenance_twin;
  j["provenance_reference"] = provenance_reference;
  j["size"] = gradient.size();
  j["has_reference"] = !reference.empty();
  std::ofstream out(path);
  if (!out) throw io_error("GradientReport::write_summary_json: cannot open " + path);
  out << j.dump(2) << "\n";
}

ControlField adjoint_gradient_wrt_control(const RunRecord& run, const ObjectiveSpec& spec) {
  return control_gradient(run, SpecRow(spec));
}

std::vector<double> adjoint_gradient_wrt_params(const RunRecord& run, const ObjectiveSpec& spec) {
  return param_gradient(run, SpecRow(spec));
}

std::vector<double> adjoint_gradient_wrt_params_mismatch(const RunRecord& run,
                                                         const SpaceTimeField& gray,
                                                         double* mismatch_value) {
  if (mismatch_value) *mismatch_value = mismatch_spacetime(run.solution, gray);
  return param_gradient(run, MismatchRow(gray));
}

double tangent_directional_derivative(const RunRecord& run, const ObjectiveSpec& spec,
                                      const ControlField& direction) {
  check_run(run);
  if (!direction.grid().same_layout(*run.grid))
    throw grid_mismatch_error("tangent: direction grid mismatch");
  const Grid1D& g = *run.grid;
  const int n = g.n_cells();
  const int m = g.n_time() - 1;
  SpecRow obj(spec);

  Eigen::VectorXd du = Eigen::VectorXd::Zero(n);
  std::vector<double> row(n);
  double total = 0.0;

  // contribution of row 0 (du^0 = 0): control partial only
  obj.dc_row(run, 0, row);
  for (int i = 0; i < n; ++i) total += row[i] * direction.at(0, i);

  for (int k = 0; k < m; ++k) {
    const double h = g.t_step(k);
    // rhs = -B_k du^k + 1/2 (dc_k + dc_{k+1})
    SpMat jk = fv_internal::flux_divergence_jacobian(run.solution.row(k), *run.model, g,
                                                     run.config.limiter);
    Eigen::VectorXd rhs = du / h - 0.5 * (jk * du);
    for (int i = 0; i < n; ++i)
      rhs(i) += 0.5 * (direction.at(k, i) + direction.at(k + 1, i));

    SpMat a = step_matrix(run, k + 1, h);
    Eigen::SparseLU<SpMat> lu(a);
    if (lu.info() != Eigen::Success) throw state_error("tangent: singular step matrix");
    du = lu.solve(rhs);

    obj.du_row(run, k + 1, row);
    for (int i = 0; i < n; ++i) total += row[i] * du(i);
    obj.dc_row(run, k + 1, row);
    for (int i = 0; i < n; ++i) total += row[i] * direction.at(k + 1, i);
  }
  return total;
}

}  // namespace twin
