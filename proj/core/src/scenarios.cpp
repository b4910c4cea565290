#include "twinmodel/scenarios.hpp"

#include <cmath>
#include <numbers>

#include "twinmodel/errors.hpp"

namespace twin {

InitialConditionSpec::Family ic_family_from_name(const std::string& name) {
  if (name == "square_wave") return InitialConditionSpec::Family::square_wave;
  if (name == "gaussian") return InitialConditionSpec::Family::gaussian;
  if (name == "sine") return InitialConditionSpec::Family::sine;
  if (name == "ramp") return InitialConditionSpec::Family::ramp;
  if (name == "constant") return InitialConditionSpec::Family::constant;
  throw config_error("unknown initial-condition family '" + name + "'");
}

std::string ic_family_name(InitialConditionSpec::Family family) {
  switch (family) {
    case InitialConditionSpec::Family::square_wave: return "square_wave";
    case InitialConditionSpec::Family::gaussian: return "gaussian";
    case InitialConditionSpec::Family::sine: return "sine";
    case InitialConditionSpec::Family::ramp: return "ramp";
    case InitialConditionSpec::Family::constant: return "constant";
  }
  return "?";
}

std::vector<double> make_initial_condition(const InitialConditionSpec& spec, const Grid1D& grid) {
  std::vector<double> u(grid.n_cells());
  const double length = grid.length();
  for (int i = 0; i < grid.n_cells(); ++i) {
    const double x = grid.x_center(i);
    switch (spec.family) {
      case InitialConditionSpec::Family::square_wave:
        u[i] = (x >= spec.center - 0.5 * spec.width && x < spec.center + 0.5 * spec.width)
                   ? spec.base + spec.amplitude
                   : spec.base;
        break;
      case InitialConditionSpec::Family::gaussian: {
        const double z = (x - spec.center) / spec.width;
        u[i] = spec.base + spec.amplitude * std::exp(-0.5 * z * z);
        break;
      }
      case InitialConditionSpec::Family::sine:
        u[i] = spec.base +
               spec.amplitude *
                   (0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (x - spec.center) / length));
        break;
      case InitialConditionSpec::Family::ramp:
        u[i] = spec.base + spec.amplitude * (x / length);
        break;
      case InitialConditionSpec::Family::constant:
        u[i] = spec.base;
        break;
    }
  }
  return u;
}

ControlSpec::Kind control_kind_from_name(const std::string& name) {
  if (name == "zero") return ControlSpec::Kind::zero;
  if (name == "constant") return ControlSpec::Kind::constant;
  if (name == "gaussian_pulse") return ControlSpec::Kind::gaussian_pulse;
  throw config_error("unknown control kind '" + name + "'");
}

std::string control_kind_name(ControlSpec::Kind kind) {
  switch (kind) {
    case ControlSpec::Kind::zero: return "zero";
    case ControlSpec::Kind::constant: return "constant";
    case ControlSpec::Kind::gaussian_pulse: return "gaussian_pulse";
  }
  return "?";
}

ControlField make_control(const ControlSpec& spec, GridPtr grid) {
  ControlField c(grid);
  switch (spec.kind) {
    case ControlSpec::Kind::zero:
      break;
    case ControlSpec::Kind::constant:
      for (double& v : c.values()) v = spec.value;
      break;
    case ControlSpec::Kind::gaussian_pulse:
      for (int k = 0; k < grid->n_time(); ++k) {
        const double zt = (grid->t_point(k) - spec.t_center) / spec.t_width;
        for (int i = 0; i < grid->n_cells(); ++i) {
          const double zx = (grid->x_center(i) - spec.x_center) / spec.x_width;
          c.at(k, i) = spec.amplitude * std::exp(-0.5 * (zt * zt + zx * zx));
        }
      }
      break;
  }
  return c;
}

}  // namespace twin
