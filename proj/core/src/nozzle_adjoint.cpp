#include "twinmodel/nozzle_adjoint.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>

#include "nozzle_internal.hpp"
#include "twinmodel/errors.hpp"
#include "twinmodel/field.hpp"

namespace twin {

namespace {

using nozzle_internal::Assembler;
using nozzle_internal::SpMat;

Eigen::VectorXd solve_transposed(const Assembler& assembler, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& rhs) {
  Eigen::VectorXd res;
  SpMat jac;
  assembler.residual_and_jacobian(q, res, jac);
  SpMat jact = jac.transpose();
  Eigen::SparseLU<SpMat> lu(jact);
  if (lu.info() != Eigen::Success)
    throw convergence_error("steady adjoint: singular steady Jacobian", {});
  return lu.solve(rhs);
}

}  // namespace

double steady_objective_value(const NozzleState& state, const StateEquation& eos,
                              const BsplineArea& area, const FlowBc& bc,
                              const NozzleConfig& config, SteadyObjective kind) {
  Assembler assembler(eos, area, bc, state.grid(), config);
  const Eigen::Map<const Eigen::VectorXd> q(state.raw().data(),
                                            static_cast<Eigen::Index>(state.raw().size()));
  const double j = assembler.mass_flux_out(q);
  if (kind == SteadyObjective::normalized_mass_flux) return j / assembler.profile().face.back();
  return j;
}

GeometryGradient adjoint_gradient_wrt_geometry(const NozzleState& state,
                                               const StateEquation& eos, const BsplineArea& area,
                                               const FlowBc& bc, const NozzleConfig& config,
                                               SteadyObjective kind) {
  Assembler assembler(eos, area, bc, state.grid(), config);
  const Eigen::Map<const Eigen::VectorXd> qmap(state.raw().data(),
                                               static_cast<Eigen::Index>(state.raw().size()));
  const Eigen::VectorXd q = qmap;
  const int np = area.num_points();

  GeometryGradient grad;
  grad.d_x.assign(np, 0.0);
  grad.d_area.assign(np, 0.0);

  Eigen::VectorXd dj_dq;
  assembler.mass_flux_out_with_partials(q, dj_dq, grad.d_x, grad.d_area,
                                        kind == SteadyObjective::normalized_mass_flux);

  const Eigen::VectorXd psi = solve_transposed(assembler, q, -dj_dq);
  assembler.geometry_vjp(q, psi, grad.d_x, grad.d_area);
  return grad;
}

std::vector<double> adjoint_gradient_wrt_eos_params(
    const NozzleState& twin_state, const std::array<SteadyField, 3>& gray_fields,
    std::span<const double> weights, const StateEquation& eos, const BsplineArea& area,
    const FlowBc& bc, const NozzleConfig& config, double* mismatch_out) {
  if (weights.size() != 3) throw argument_error("eos adjoint: three field weights required");
  Assembler assembler(eos, area, bc, twin_state.grid(), config);
  const int n = twin_state.n_cells();
  const Eigen::Map<const Eigen::VectorXd> qmap(twin_state.raw().data(), 3 * n);
  const Eigen::VectorXd q = qmap;

  const auto twin_fields = twin_state.to_fields();
  if (mismatch_out) {
    *mismatch_out = mismatch_steady_weighted(
        std::span<const SteadyField>(twin_fields.data(), 3),
        std::span<const SteadyField>(gray_fields.data(), 3), weights);
  }

  // dM/dq per cell: fields are rho = q0, u = q1/q0, E = q2/q0
  Eigen::VectorXd dm_dq = Eigen::VectorXd::Zero(3 * n);
  const Grid1D& g = twin_state.grid();
  for (int i = 0; i < n; ++i) {
    const double dx = g.x_width(i);
    const double r = twin_state.rho(i);
    const double u = twin_state.velocity(i);
    const double e_m = twin_state.energy(i) / r;  // specific total energy
    const double d_r = twin_fields[0].at(i) - gray_fields[0].at(i);
    const double d_u = twin_fields[1].at(i) - gray_fields[1].at(i);
    const double d_e = twin_fields[2].at(i) - gray_fields[2].at(i);
    dm_dq(3 * i) += 2.0 * weights[0] * dx * d_r;
    dm_dq(3 * i) += 2.0 * weights[1] * dx * d_u * (-u / r);
    dm_dq(3 * i + 1) += 2.0 * weights[1] * dx * d_u / r;
    dm_dq(3 * i) += 2.0 * weights[2] * dx * d_e * (-e_m / r);
    dm_dq(3 * i + 2) += 2.0 * weights[2] * dx * d_e / r;
  }

  const Eigen::VectorXd psi = solve_transposed(assembler, q, -dm_dq);
  const Eigen::VectorXd grad = assembler.eos_param_vjp(q, psi);
  return std::vector<double>(grad.data(), grad.data() + grad.size());
}

}  // namespace twin
