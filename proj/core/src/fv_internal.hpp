// Internal finite-volume assembly shared by the forward solver and the
// adjoint engine. Not installed; Eigen types allowed here.
#pragma once

#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "twinmodel/flux.hpp"
#include "twinmodel/fv1d.hpp"
#include "twinmodel/grid.hpp"

namespace twin::fv_internal {

using SpMat = Eigen::SparseMatrix<double>;

/// Flux divergence R_i = (Fhat_{i+1/2} - Fhat_{i-1/2}) / dx_i on the periodic grid.
void flux_divergence(std::span<const double> u, const FluxModel& model, const Grid1D& grid,
                     Limiter limiter, std::span<double> out);

/// Jacobian dR/du (periodic pentadiagonal for MUSCL, tridiagonal first-order).
SpMat flux_divergence_jacobian(std::span<const double> u, const FluxModel& model,
                               const Grid1D& grid, Limiter limiter);

/// Accumulates out[j] += sum_i w_i dR_i/dxi_j for a parameterized flux model.
void flux_divergence_param_vjp(std::span<const double> u, const FluxModel& model,
                               const Grid1D& grid, Limiter limiter, std::span<const double> w,
                               std::span<double> out);

/// Tie margin of the minmod and wave-speed branches for one state vector.
double tie_margin(std::span<const double> u, const FluxModel& model, Limiter limiter);

}  // namespace twin::fv_internal
