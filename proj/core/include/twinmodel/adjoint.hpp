#pragma once

#include <string>
#include <vector>

#include "twinmodel/field.hpp"
#include "twinmodel/fv1d.hpp"
#include "twinmodel/objective.hpp"

namespace twin {

/// Paired gradient values (twin vs. optional reference) with error norms.
struct GradientReport {
  std::vector<double> gradient;
  std::vector<double> reference;  // empty when no reference model is available
  double linf_err = 0.0;
  double rel_l2_err = 0.0;
  std::string provenance_twin;
  std::string provenance_reference;

  static GradientReport compare(std::vector<double> gradient, std::vector<double> reference,
                                std::string provenance_twin, std::string provenance_reference);

  /// CSV `index,grad_twin,grad_reference,abs_err` (reference/abs_err blank
  /// when absent) plus JSON summary {linf_err, rel_l2_err}.
  void write_csv(const std::string& path) const;
  void write_summary_json(const std::string& path) const;
};

/// dJ/dc_{ik} for the discrete objective of a completed run: reverse sweep
/// over the stored states with one transposed Newton-system solve per step.
/// Exact for the discrete system (implicit function theorem at each converged
/// Crank-Nicolson step).
ControlField adjoint_gradient_wrt_control(const RunRecord& run, const ObjectiveSpec& spec);

/// dJ/dxi for the run's flux-model coefficients (same reverse sweep with
/// parameter-Jacobian accumulation).
std::vector<double> adjoint_gradient_wrt_params(const RunRecord& run, const ObjectiveSpec& spec);

/// d/dxi of the space-time mismatch against a gray reference solution;
/// optionally reports the mismatch value itself. This is the training
/// gradient (regularization terms are added by the caller).
std::vector<double> adjoint_gradient_wrt_params_mismatch(const RunRecord& run,
                                                         const SpaceTimeField& gray,
                                                         double* mismatch_value = nullptr);

/// Directional derivative of J along a control perturbation via a forward
/// tangent sweep; dual counterpart of adjoint_gradient_wrt_control.
double tangent_directional_derivative(const RunRecord& run, const ObjectiveSpec& spec,
                                      const ControlField& direction);

}  // namespace twin
