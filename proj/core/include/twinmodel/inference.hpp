#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twinmodel/adjoint.hpp"
#include "twinmodel/eos.hpp"
#include "twinmodel/field.hpp"
#include "twinmodel/flux.hpp"
#include "twinmodel/fv1d.hpp"
#include "twinmodel/lbfgs.hpp"
#include "twinmodel/nozzle.hpp"
#include "twinmodel/nozzle_adjoint.hpp"

namespace twin {

/// Training problem settings: L1 weight (p = 1 fixed; on the nonnegative
/// orthant the penalty is the plain coefficient sum) and optimizer options.
struct InferenceProblem {
  double lambda = 0.0;
  LbfgsOptions optimizer{};
};

/// Per-field mismatch weights for the steady case (no v in the quasi-1D
/// reduction).
struct WeightSet {
  double w_rho = 1.0;
  double w_u = 1.0;
  double w_E = 1.0;
  void validate() const;
};

struct TrainingTraceEntry {
  int iter = 0;
  double objective = 0.0;
  double mismatch = 0.0;
  double reg_term = 0.0;
  double proj_grad_inf = 0.0;
};

void write_trace_csv(std::span<const TrainingTraceEntry> trace, const std::string& path);

// ---------------------------------------------------------------------------
// space-time flux inference
// ---------------------------------------------------------------------------

/// Value and adjoint gradient of M(xi) + lambda sum(xi) for the twin forward
/// solve against a gray reference; evaluation failures (solver divergence)
/// return false so the optimizer rejects the step. Also usable directly for
/// finite-difference checks.
class FluxTrainingObjective {
 public:
  FluxTrainingObjective(const SpaceTimeField& gray, ControlField control, SolverConfig solver,
                        SigmoidFluxBasis basis, double lambda);

  bool operator()(std::span<const double> xi, double& value, std::span<double> grad) const;
  /// Mismatch-only forward evaluation (no gradient).
  std::optional<double> mismatch(std::span<const double> xi) const;

  double lambda() const { return lambda_; }
  const SigmoidFluxBasis& basis() const { return basis_; }
  double last_mismatch() const { return last_mismatch_; }
  double last_reg() const { return last_reg_; }

 private:
  const SpaceTimeField& gray_;
  ControlField control_;
  SolverConfig solver_;
  SigmoidFluxBasis basis_;
  double lambda_;
  mutable double last_mismatch_ = 0.0;
  mutable double last_reg_ = 0.0;
};

struct FluxTrainingResult {
  TwinFlux model;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  int iterations = 0;
  double objective = 0.0;
  double mismatch = 0.0;
  double reg_term = 0.0;
  std::vector<TrainingTraceEntry> trace;
};

/// Least-squares initialization of xi from a secant estimate of the flux
/// slope in the gray data (local |u_t|/|u_x| speeds); falls back to uniform
/// small positives when the data carry no usable slopes.
std::vector<double> initial_flux_guess(const SpaceTimeField& gray, const SigmoidFluxBasis& basis);

/// lambda = scale * M(xi0) (relative regularization default).
double relative_lambda(const FluxTrainingObjective& objective, std::span<const double> xi0,
                       double scale = 1e-6);

FluxTrainingResult train_flux(const SpaceTimeField& gray, const ControlField& control,
                              const SolverConfig& solver, const SigmoidFluxBasis& basis,
                              const InferenceProblem& problem, std::span<const double> xi0);

// ---------------------------------------------------------------------------
// steady EOS inference
// ---------------------------------------------------------------------------

struct NozzleSetup {
  BsplineArea area;
  FlowBc bc;
  GridPtr grid;
  NozzleConfig config;
};

/// Reciprocal of the sample-average squared mismatch per field; throws
/// calibration_error on empty samples or vanishing averages.
WeightSet weights_from_samples(std::span<const double> rho_norms,
                               std::span<const double> u_norms,
                               std::span<const double> e_norms);

/// Random-guess weight calibration: draws n_random (alpha, p0) samples, runs
/// the twin steady solve for each, averages the squared per-field mismatches,
/// and returns the reciprocals. Diverging samples are skipped; throws
/// calibration_error when none survive or an average vanishes.
WeightSet calibrate_weights(const std::array<SteadyField, 3>& gray_fields,
                            const ParamEos& skeleton, const NozzleSetup& setup, int n_random,
                            std::uint64_t seed);

/// Pressure profile recovered from the gray solution's own steady momentum
/// balance, dp/dx = -d(rho u^2 A)/dx / A, integrated backward from the known
/// outlet pressure. Returns dimensional pressures per cell; needs nothing the
/// gray box does not provide.
std::vector<double> recover_pressure_from_momentum(const std::array<SteadyField, 3>& gray_fields,
                                                   const BsplineArea& area, const FlowBc& bc);

/// Staircase fit of the skeleton to given pressures over the state cloud
/// (strictly positive coefficients; alpha = 0 would have zero sound speed).
ParamEos initial_eos_guess(const ParamEos& skeleton,
                           std::span<const std::array<double, 2>> state_cloud,
                           std::span<const double> pressures);

/// Convenience overload fitting an ideal-gas surface (used when no recovered
/// pressures are available).
ParamEos initial_eos_guess(const ParamEos& skeleton,
                           std::span<const std::array<double, 2>> state_cloud,
                           double gamma = 1.4);

/// Linear-in-U reference surface p = p_ref + slope (U - u_ref) used as the
/// always-hyperbolic end of the EOS homotopy ladder.
struct EosHomotopyAnchor {
  double slope = 0.4;
  double u_ref = 2.5e5;
  double p_ref = 1e5;
};
EosHomotopyAnchor make_homotopy_anchor(std::span<const std::array<double, 2>> state_cloud,
                                       std::span<const double> pressures);

/// solve_steady with a fallback homotopy from the anchor surface to the full
/// state equation (adaptive blend steps, each warm-started); the returned
/// state solves the *unblended* equation to steady_tol, so adjoints built on
/// it stay exact. Twin state equations can have locally non-hyperbolic
/// pockets where a direct solve stalls.
SteadyResult solve_steady_robust(const StateEquation& eos, const NozzleSetup& setup,
                                 const NozzleState* warm_start,
                                 const EosHomotopyAnchor& anchor);

class EosTrainingObjective {
 public:
  EosTrainingObjective(const std::array<SteadyField, 3>& gray_fields, ParamEos skeleton,
                       NozzleSetup setup, WeightSet weights, double lambda,
                       const NozzleState* warm_start = nullptr);

  bool operator()(std::span<const double> params, double& value, std::span<double> grad) const;

  double lambda() const { return lambda_; }
  double last_mismatch() const { return last_mismatch_; }
  double last_reg() const { return last_reg_; }
  const ParamEos& skeleton() const { return eos_; }

 private:
  const std::array<SteadyField, 3>& gray_;
  mutable ParamEos eos_;
  NozzleSetup setup_;
  WeightSet weights_;
  double lambda_;
  const NozzleState* warm_start_;
  EosHomotopyAnchor anchor_;
  mutable double last_mismatch_ = 0.0;
  mutable double last_reg_ = 0.0;
};

struct EosTrainingResult {
  ParamEos model;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  int iterations = 0;
  double objective = 0.0;
  double mismatch = 0.0;
  double reg_term = 0.0;
  std::vector<TrainingTraceEntry> trace;
};

EosTrainingResult train_eos(const std::array<SteadyField, 3>& gray_fields,
                            const ParamEos& start, const NozzleSetup& setup,
                            const WeightSet& weights, const InferenceProblem& problem,
                            const NozzleState* warm_start = nullptr);

// ---------------------------------------------------------------------------
// recovery quality
// ---------------------------------------------------------------------------

/// In-region vs. out-of-region recovery errors. Flux comparisons are made on
/// dF/du (the flux itself is determined only up to an additive constant);
/// EOS comparisons on p(rho, U) split by hull membership.
struct RecoveryReport {
  double in_rel_l2 = 0.0;
  double in_sup = 0.0;       ///< max |diff| / max |reference| in-region
  double out_rel_l2 = 0.0;
  double out_sup = 0.0;
  int n_in = 0;
  int n_out = 0;
};

RecoveryReport flux_recovery_report(const FluxModel& trained, const FluxModel& truth,
                                    Interval excited, Interval ambient, int n_samples = 512);

RecoveryReport eos_recovery_report(const StateEquation& trained, const StateEquation& truth,
                                   const StateHull& hull, Interval rho_range, Interval u_range,
                                   int n_rho = 48, int n_u = 48);

/// Width of the u-range where the trained slope tracks the truth slope within
/// rel_tol of the ambient slope scale (the paper's recovered-range measure).
double recovered_range_width(const FluxModel& trained, const FluxModel& truth, Interval ambient,
                             double rel_tol = 0.1, int n_samples = 1024);

}  // namespace twin
