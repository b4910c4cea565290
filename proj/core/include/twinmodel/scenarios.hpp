#pragma once

#include <string>
#include <vector>

#include "twinmodel/fv1d.hpp"
#include "twinmodel/grid.hpp"

namespace twin {

/// Configurable initial-condition family for the 1-D porous case; each family
/// excites a different saturation range.
struct InitialConditionSpec {
  enum class Family { square_wave, gaussian, sine, ramp, constant };
  Family family = Family::square_wave;
  double base = 0.0;       ///< background value
  double amplitude = 1.0;  ///< peak above base
  double center = 0.5;     ///< feature location (phase for sine)
  double width = 0.25;     ///< feature width (std-dev for gaussian)
};

InitialConditionSpec::Family ic_family_from_name(const std::string& name);
std::string ic_family_name(InitialConditionSpec::Family family);

std::vector<double> make_initial_condition(const InitialConditionSpec& spec, const Grid1D& grid);

/// Exogenous control families.
struct ControlSpec {
  enum class Kind { zero, constant, gaussian_pulse };
  Kind kind = Kind::zero;
  double value = 0.0;  ///< constant level
  double amplitude = 0.0;
  double t_center = 0.5, t_width = 0.1;
  double x_center = 0.5, x_width = 0.1;
};

ControlSpec::Kind control_kind_from_name(const std::string& name);
std::string control_kind_name(ControlSpec::Kind kind);

ControlField make_control(const ControlSpec& spec, GridPtr grid);

}  // namespace twin
