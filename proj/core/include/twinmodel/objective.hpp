#pragma once

#include <string>

#include "twinmodel/fv1d.hpp"

namespace twin {

/// Scalar objective J = sum_{k,i} j(u_{ki}, c_{ki}) w_k dx_i with an analytic
/// integrand. `target_tracking` is j = (u - u_target)^2 + beta c^2 (beta = 0
/// by default); `constant` is j = 1, independent of state and control.
struct ObjectiveSpec {
  enum class Kind { constant, target_tracking };
  Kind kind = Kind::target_tracking;
  double u_target = 0.5;
  double control_penalty = 0.0;  // beta

  double integrand(double u, double c) const;
  double dj_du(double u, double c) const;
  double dj_dc(double u, double c) const;
};

/// Evaluates the discrete objective over a completed run.
double evaluate_objective(const RunRecord& run, const ObjectiveSpec& spec);

}  // namespace twin
