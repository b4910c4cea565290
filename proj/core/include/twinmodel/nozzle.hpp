#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "twinmodel/bspline.hpp"
#include "twinmodel/eos.hpp"
#include "twinmodel/field.hpp"
#include "twinmodel/grid.hpp"

namespace twin {

/// Subsonic boundary pair: total pressure held at the inlet (with fixed
/// reservoir density), static pressure held at the outlet.
struct FlowBc {
  double p_total_in = 1e5;
  double p_out = 9e4;
  double rho_ref = 1.0;
  void validate() const;
};

struct NozzleConfig {
  int max_steps = 500;
  double steady_tol = 1e-10;  ///< L-inf of the nondimensional steady residual
  double cfl0 = 5.0;          ///< initial pseudo-time CFL
  double cfl_max = 1e12;
  double wave_speed_safety = 2.0;  ///< global Rusanov coefficient multiplier
};

/// Conservative state (rho, rho u, rho E) per cell, stored nondimensional:
/// densities scaled by bc.rho_ref, pressures/energies by bc.p_total_in,
/// velocities by the reference sound-speed scale sqrt(p_total_in/rho_ref).
class NozzleState {
 public:
  NozzleState(GridPtr grid, const FlowBc& bc);

  const Grid1D& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  int n_cells() const { return grid_->n_cells(); }

  double rho(int i) const { return q_[3 * i]; }
  double momentum(int i) const { return q_[3 * i + 1]; }
  double energy(int i) const { return q_[3 * i + 2]; }
  double velocity(int i) const { return q_[3 * i + 1] / q_[3 * i]; }
  /// Internal energy per volume U = rhoE - 1/2 rho u^2 (nondimensional).
  double internal_energy(int i) const;

  double rho_scale() const { return rho_scale_; }
  double p_scale() const { return p_scale_; }
  /// Dimensional (rho, U) pair of one cell, for EOS evaluation.
  std::array<double, 2> state_point(int i) const;

  /// (rho, u, E) steady fields (nondimensional; E is specific total energy).
  std::array<SteadyField, 3> to_fields() const;

  std::vector<double>& raw() { return q_; }
  const std::vector<double>& raw() const { return q_; }

 private:
  GridPtr grid_;
  std::vector<double> q_;  // interleaved (rho, rho u, rho E)
  double rho_scale_;
  double p_scale_;
};

struct SteadyResult {
  NozzleState state;
  std::vector<double> residual_history;
  int steps = 0;
};

/// Pseudo-transient (backward-Euler continuation) solve of the quasi-1D Euler
/// system with area source term to Newton termination;
/// throws convergence_error (with the residual history) on failure. The same
/// discretization serves gray-box (ReferenceEos) and twin (ParamEos) runs.
SteadyResult solve_steady(const StateEquation& eos, const BsplineArea& area, const FlowBc& bc,
                          GridPtr grid, const NozzleConfig& config = {},
                          const NozzleState* warm_start = nullptr);

/// Boundary mass fluxes rho*u*A evaluated from the inlet/outlet interface
/// numerical fluxes; at a converged steady state the two agree to solver
/// tolerance.
struct MassFluxPair {
  double inlet;
  double outlet;
};
MassFluxPair mass_flux_pair(const NozzleState& state, const StateEquation& eos,
                            const BsplineArea& area, const FlowBc& bc,
                            const NozzleConfig& config = {});

/// The steady objective J: outlet mass flux (nondimensional).
double mass_flux(const NozzleState& state, const StateEquation& eos, const BsplineArea& area,
                 const FlowBc& bc, const NozzleConfig& config = {});

/// Steady solution CSV `x,area,rho,u,E,p` (nondimensional columns).
void write_nozzle_csv(const NozzleState& state, const StateEquation& eos,
                      const BsplineArea& area, const std::string& path);

struct NozzleSolutionData {
  std::vector<double> x, area, rho, u, E, p;
};
NozzleSolutionData read_nozzle_csv(const std::string& path);

/// Rebuilds a conservative state from (rho, u, E) steady fields.
NozzleState state_from_fields(const std::array<SteadyField, 3>& fields, GridPtr grid,
                              const FlowBc& bc);

}  // namespace twin
