#pragma once

#include <memory>
#include <span>
#include <vector>

#include "twinmodel/field.hpp"
#include "twinmodel/flux.hpp"
#include "twinmodel/grid.hpp"

namespace twin {

enum class Limiter {
  first_order,   ///< piecewise-constant states
  minmod_muscl,  ///< piecewise-linear, minmod-limited slopes (default)
};

/// Settings for the implicit Crank-Nicolson stepper.
struct SolverConfig {
  double newton_tol = 1e-10;  ///< L-inf tolerance on the step residual
  int newton_max_iter = 50;
  Limiter limiter = Limiter::minmod_muscl;
};

/// Space-time exogenous source strength c(t_k, x_i); same layout as a field.
using ControlField = SpaceTimeField;

/// Local Lax-Friedrichs interface flux
///   Fhat = 1/2 (F(uL) + F(uR)) - 1/2 a (uR - uL),  a = max(|F'(uL)|, |F'(uR)|).
/// Consistent (uL = uR = u gives F(u)) and monotone for monotone F.
double numerical_flux(double u_left, double u_right, const FluxModel& model);

/// Left/right interface states for a periodic cell-average vector. Entry f
/// describes the interface between cell f and cell (f+1) mod N.
struct ReconstructedStates {
  std::vector<double> left;
  std::vector<double> right;
};
ReconstructedStates muscl_reconstruct(std::span<const double> cell_averages,
                                      Limiter limiter = Limiter::minmod_muscl);

/// Newton iteration trace for one implicit step.
struct NewtonTrace {
  int iterations = 0;
  std::vector<double> residual_norms;
};

/// One Crank-Nicolson step: solves
///   (u1 - u0)/dt + 1/2 (R(u1) + R(u0)) = 1/2 (c0 + c1)
/// per cell, with R the finite-volume flux divergence, to newton_tol in the
/// L-inf norm. Throws step_error on non-convergence.
std::vector<double> step_crank_nicolson(std::span<const double> u_prev, const FluxModel& model,
                                        std::span<const double> c_prev,
                                        std::span<const double> c_next, double dt,
                                        const Grid1D& grid, const SolverConfig& config,
                                        NewtonTrace* trace = nullptr);

/// A completed forward run with everything a reverse sweep needs.
struct RunRecord {
  GridPtr grid;
  std::shared_ptr<const FluxModel> model;
  ControlField control;
  SolverConfig config;
  SpaceTimeField solution;  ///< row k=0 is the initial condition
  std::vector<int> newton_iterations;
};

/// Integrates all time rows of the grid; row 0 equals u0.
RunRecord solve_spacetime(std::span<const double> u0, std::shared_ptr<const FluxModel> model,
                          ControlField control, GridPtr grid, const SolverConfig& config = {});

/// Total conserved quantity sum_i u_i dx_i of a solution row.
double total_mass(const RunRecord& run, int k);

/// Smallest distance of any limiter or wave-speed tie-break from switching,
/// over all stored states of the run. Finite-difference gradient checks are
/// screened against this margin (non-differentiable points are excluded by
/// construction).
double limiter_tie_margin(const RunRecord& run);

}  // namespace twin
