#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twinmodel/bspline.hpp"
#include "twinmodel/eos.hpp"
#include "twinmodel/flux.hpp"
#include "twinmodel/fv1d.hpp"
#include "twinmodel/lbfgs.hpp"
#include "twinmodel/nozzle.hpp"
#include "twinmodel/objective.hpp"
#include "twinmodel/scenarios.hpp"

namespace twin::cli {

/// Parsed and validated experiment configuration. Unknown keys anywhere in
/// the document are rejected.
struct ExperimentConfig {
  enum class Case { porous1d, nozzle_eos };
  Case experiment = Case::porous1d;
  std::uint64_t seed = 42;

  // porous1d
  int nx = 100, nt = 100;
  double length = 1.0, horizon = 1.0;
  InitialConditionSpec initial_condition{};
  ControlSpec control{};
  double truth_flux_a = 2.0;
  int basis_m = 20;
  double basis_lo = -0.1, basis_hi = 1.1, basis_sigma = 0.0;  // 0 => 1.2/m
  SolverConfig solver{};
  ObjectiveSpec objective{};

  // nozzle-eos
  std::string truth_eos_kind = "ideal";
  double truth_eos_gamma = 1.4;
  double truth_eos_a = 1e4, truth_eos_b = 0.1;
  int nozzle_cells = 60;
  FlowBc flow_bc{};
  NozzleConfig nozzle_config{};
  std::vector<std::array<double, 2>> control_points{
      {0.0, 1.0}, {0.2, 0.9}, {0.4, 0.8}, {0.6, 0.8}, {0.8, 0.9}, {1.0, 1.0}};
  int n_rho = 6, n_u = 8;
  int calib_n_random = 5;

  // training
  bool lambda_relative = true;
  double lambda_value = 1e-6;  // scale (relative) or weight (absolute)
  int sweep_count = 3;
  double sweep_factor = 10.0;
  LbfgsOptions optimizer{};

  double gradient_acceptance = 0.15;

  std::string case_name() const;
  SigmoidFluxBasis make_basis() const;
  ReferenceEos make_truth_eos() const;
  BsplineArea make_area() const;
};

/// Parses a config file; throws config_error on any validation failure.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

}  // namespace twin::cli
