#include "twinmodel/objective.hpp"

namespace twin {

double ObjectiveSpec::integrand(double u, double c) const {
  switch (kind) {
    case Kind::constant:
      return 1.0;
    case Kind::target_tracking: {
      const double d = u - u_target;
      return d * d + control_penalty * c * c;
    }
  }
  return 0.0;
}

double ObjectiveSpec::dj_du(double u, double /*c*/) const {
  switch (kind) {
    case Kind::constant:
      return 0.0;
    case Kind::target_tracking:
      return 2.0 * (u - u_target);
  }
  return 0.0;
}

double ObjectiveSpec::dj_dc(double /*u*/, double c) const {
  switch (kind) {
    case Kind::constant:
      return 0.0;
    case Kind::target_tracking:
      return 2.0 * control_penalty * c;
  }
  return 0.0;
}

double evaluate_objective(const RunRecord& run, const ObjectiveSpec& spec) {
  const Grid1D& g = *run.grid;
  double sum = 0.0;
  for (int k = 0; k < g.n_time(); ++k) {
    const double wk = g.t_weight(k);
    double row = 0.0;
    for (int i = 0; i < g.n_cells(); ++i)
      row += spec.integrand(run.solution.at(k, i), run.control.at(k, i)) * g.x_width(i);
    sum += wk * row;
  }
  return sum;
}

}  // namespace twin
