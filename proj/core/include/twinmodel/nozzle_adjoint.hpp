#pragma once

#include <array>
#include <span>
#include <vector>

#include "twinmodel/nozzle.hpp"

namespace twin {

/// Steady objectives for the nozzle case. The normalized variant divides the
/// outlet mass flux by the outlet face area, which removes the uniform
/// area-scaling direction from the gradient.
enum class SteadyObjective { mass_flux, normalized_mass_flux };

double steady_objective_value(const NozzleState& state, const StateEquation& eos,
                              const BsplineArea& area, const FlowBc& bc,
                              const NozzleConfig& config, SteadyObjective kind);

/// dJ/d(control point coordinates) via the steady discrete adjoint:
/// (dR/dq)^T psi = -(dJ/dq)^T, then dJ/dtheta = dJ/dtheta + psi^T dR/dtheta.
/// Components for every control point (the frozen endpoints included; callers
/// report the interior ones).
struct GeometryGradient {
  std::vector<double> d_x;
  std::vector<double> d_area;
};
GeometryGradient adjoint_gradient_wrt_geometry(const NozzleState& state,
                                               const StateEquation& eos, const BsplineArea& area,
                                               const FlowBc& bc, const NozzleConfig& config,
                                               SteadyObjective kind);

/// Gradient of the weighted steady mismatch sum_q w_q ||twin_q - gray_q||^2
/// (fields rho, u, E; cell-width-weighted norms) with respect to the EOS
/// parameters of `eos`, via the same steady adjoint. Optionally returns the
/// mismatch value.
std::vector<double> adjoint_gradient_wrt_eos_params(
    const NozzleState& twin_state, const std::array<SteadyField, 3>& gray_fields,
    std::span<const double> weights, const StateEquation& eos, const BsplineArea& area,
    const FlowBc& bc, const NozzleConfig& config, double* mismatch_out = nullptr);

}  // namespace twin
