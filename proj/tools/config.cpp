#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "twinmodel/errors.hpp"

namespace twin::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key()))
      throw config_error("unknown key '" + it.key() + "' in " + where);
}

double num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw config_error(std::string(key) + " must be a number");
  return obj[key].get<double>();
}

int integer(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) throw config_error(std::string(key) + " must be an integer");
  return obj[key].get<int>();
}

std::string str(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw config_error(std::string(key) + " must be a string");
  return obj[key].get<std::string>();
}

}  // namespace

std::string ExperimentConfig::case_name() const {
  return experiment == Case::porous1d ? "porous1d" : "nozzle-eos";
}

SigmoidFluxBasis ExperimentConfig::make_basis() const {
  return SigmoidFluxBasis::equispaced(basis_m, basis_lo, basis_hi,
                                      basis_sigma > 0.0 ? basis_sigma : 1.2 / basis_m);
}

ReferenceEos ExperimentConfig::make_truth_eos() const {
  return ReferenceEos::from_name(truth_eos_kind, truth_eos_a, truth_eos_b, truth_eos_gamma);
}

BsplineArea ExperimentConfig::make_area() const { return BsplineArea(control_points); }

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse failure: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config root must be an object");
  reject_unknown(j,
                 {"case", "seed", "grid", "initial_condition", "control", "truth", "basis",
                  "eos_basis", "lambda", "sweep", "optimizer", "solver", "nozzle", "objective",
                  "gradient_acceptance"},
                 "config root");

  ExperimentConfig cfg;
  const std::string case_name = str(j, "case", "");
  if (case_name == "porous1d")
    cfg.experiment = ExperimentConfig::Case::porous1d;
  else if (case_name == "nozzle-eos")
    cfg.experiment = ExperimentConfig::Case::nozzle_eos;
  else
    throw config_error("case must be 'porous1d' or 'nozzle-eos'");

  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw config_error("seed must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, {"nx", "nt", "length", "horizon"}, "grid");
    cfg.nx = integer(g, "nx", cfg.nx);
    cfg.nt = integer(g, "nt", cfg.nt);
    cfg.length = num(g, "length", cfg.length);
    cfg.horizon = num(g, "horizon", cfg.horizon);
    if (cfg.nx < 1 || cfg.nt < 2) throw config_error("grid: need nx >= 1 and nt >= 2");
    if (!(cfg.length > 0.0)) throw config_error("grid: length must be positive");
    if (!(cfg.horizon > 0.0)) throw config_error("grid: horizon must be positive");
  }

  if (j.contains("initial_condition")) {
    const json& ic = j["initial_condition"];
    reject_unknown(ic, {"family", "base", "amplitude", "center", "width"}, "initial_condition");
    cfg.initial_condition.family = ic_family_from_name(str(ic, "family", "square_wave"));
    cfg.initial_condition.base = num(ic, "base", cfg.initial_condition.base);
    cfg.initial_condition.amplitude = num(ic, "amplitude", cfg.initial_condition.amplitude);
    cfg.initial_condition.center = num(ic, "center", cfg.initial_condition.center);
    cfg.initial_condition.width = num(ic, "width", cfg.initial_condition.width);
    if (!(cfg.initial_condition.width > 0.0))
      throw config_error("initial_condition: width must be positive");
  }

  if (j.contains("control")) {
    const json& c = j["control"];
    reject_unknown(c, {"kind", "value", "amplitude", "t_center", "t_width", "x_center",
                       "x_width"},
                   "control");
    cfg.control.kind = control_kind_from_name(str(c, "kind", "zero"));
    cfg.control.value = num(c, "value", cfg.control.value);
    cfg.control.amplitude = num(c, "amplitude", cfg.control.amplitude);
    cfg.control.t_center = num(c, "t_center", cfg.control.t_center);
    cfg.control.t_width = num(c, "t_width", cfg.control.t_width);
    cfg.control.x_center = num(c, "x_center", cfg.control.x_center);
    cfg.control.x_width = num(c, "x_width", cfg.control.x_width);
  }

  if (j.contains("truth")) {
    const json& t = j["truth"];
    reject_unknown(t, {"flux", "eos"}, "truth");
    if (t.contains("flux")) {
      const json& f = t["flux"];
      reject_unknown(f, {"type", "A"}, "truth.flux");
      if (str(f, "type", "buckley_leverett") != "buckley_leverett")
        throw config_error("truth.flux.type must be 'buckley_leverett'");
      cfg.truth_flux_a = num(f, "A", cfg.truth_flux_a);
      if (cfg.truth_flux_a < 0.0) throw config_error("truth.flux.A must be nonnegative");
    }
    if (t.contains("eos")) {
      const json& e = t["eos"];
      reject_unknown(e, {"type", "gamma", "a", "b"}, "truth.eos");
      cfg.truth_eos_kind = str(e, "type", cfg.truth_eos_kind);
      if (cfg.truth_eos_kind != "ideal" && cfg.truth_eos_kind != "vdw" &&
          cfg.truth_eos_kind != "rk")
        throw config_error("truth.eos.type must be ideal, vdw, or rk");
      cfg.truth_eos_gamma = num(e, "gamma", cfg.truth_eos_gamma);
      cfg.truth_eos_a = num(e, "a", cfg.truth_eos_a);
      cfg.truth_eos_b = num(e, "b", cfg.truth_eos_b);
      if (!(cfg.truth_eos_gamma > 1.0)) throw config_error("truth.eos.gamma must exceed 1");
    }
  }

  if (j.contains("basis")) {
    const json& b = j["basis"];
    reject_unknown(b, {"m", "lo", "hi", "sigma"}, "basis");
    cfg.basis_m = integer(b, "m", cfg.basis_m);
    cfg.basis_lo = num(b, "lo", cfg.basis_lo);
    cfg.basis_hi = num(b, "hi", cfg.basis_hi);
    cfg.basis_sigma = num(b, "sigma", cfg.basis_sigma);
    if (cfg.basis_m < 1) throw config_error("basis.m must be >= 1");
    if (!(cfg.basis_hi > cfg.basis_lo)) throw config_error("basis: hi must exceed lo");
  }

  if (j.contains("eos_basis")) {
    const json& b = j["eos_basis"];
    reject_unknown(b, {"n_rho", "n_U"}, "eos_basis");
    cfg.n_rho = integer(b, "n_rho", cfg.n_rho);
    cfg.n_u = integer(b, "n_U", cfg.n_u);
    if (cfg.n_rho < 1 || cfg.n_u < 1) throw config_error("eos_basis counts must be >= 1");
  }

  if (j.contains("lambda")) {
    const json& l = j["lambda"];
    reject_unknown(l, {"mode", "value"}, "lambda");
    const std::string mode = str(l, "mode", "relative");
    if (mode == "relative")
      cfg.lambda_relative = true;
    else if (mode == "absolute")
      cfg.lambda_relative = false;
    else
      throw config_error("lambda.mode must be 'relative' or 'absolute'");
    cfg.lambda_value = num(l, "value", cfg.lambda_value);
    if (!(cfg.lambda_value >= 0.0)) throw config_error("lambda.value must be >= 0");
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    reject_unknown(s, {"count", "factor"}, "sweep");
    cfg.sweep_count = integer(s, "count", cfg.sweep_count);
    cfg.sweep_factor = num(s, "factor", cfg.sweep_factor);
    if (cfg.sweep_count < 1) throw config_error("sweep.count must be >= 1");
    if (!(cfg.sweep_factor > 1.0)) throw config_error("sweep.factor must exceed 1");
  }

  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    reject_unknown(o, {"memory", "max_iters", "grad_tol"}, "optimizer");
    cfg.optimizer.memory = integer(o, "memory", cfg.optimizer.memory);
    cfg.optimizer.max_iters = integer(o, "max_iters", cfg.optimizer.max_iters);
    cfg.optimizer.grad_tol = num(o, "grad_tol", cfg.optimizer.grad_tol);
    if (cfg.optimizer.memory < 1 || cfg.optimizer.max_iters < 1 ||
        !(cfg.optimizer.grad_tol > 0.0))
      throw config_error("optimizer settings out of range");
  }

  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, {"newton_tol", "newton_max_iter", "limiter"}, "solver");
    cfg.solver.newton_tol = num(s, "newton_tol", cfg.solver.newton_tol);
    cfg.solver.newton_max_iter = integer(s, "newton_max_iter", cfg.solver.newton_max_iter);
    const std::string lim = str(s, "limiter", "minmod");
    if (lim == "minmod")
      cfg.solver.limiter = Limiter::minmod_muscl;
    else if (lim == "first_order")
      cfg.solver.limiter = Limiter::first_order;
    else
      throw config_error("solver.limiter must be 'minmod' or 'first_order'");
    if (!(cfg.solver.newton_tol > 0.0) || cfg.solver.newton_max_iter < 1)
      throw config_error("solver settings out of range");
  }

  if (j.contains("nozzle")) {
    const json& n = j["nozzle"];
    reject_unknown(n,
                   {"n_cells", "p_total_in", "p_out", "rho_ref", "steady_tol", "max_steps",
                    "control_points", "calib_n_random"},
                   "nozzle");
    cfg.nozzle_cells = integer(n, "n_cells", cfg.nozzle_cells);
    cfg.flow_bc.p_total_in = num(n, "p_total_in", cfg.flow_bc.p_total_in);
    cfg.flow_bc.p_out = num(n, "p_out", cfg.flow_bc.p_out);
    cfg.flow_bc.rho_ref = num(n, "rho_ref", cfg.flow_bc.rho_ref);
    cfg.nozzle_config.steady_tol = num(n, "steady_tol", cfg.nozzle_config.steady_tol);
    cfg.nozzle_config.max_steps = integer(n, "max_steps", cfg.nozzle_config.max_steps);
    cfg.calib_n_random = integer(n, "calib_n_random", cfg.calib_n_random);
    if (cfg.nozzle_cells < 2) throw config_error("nozzle.n_cells must be >= 2");
    if (!(cfg.nozzle_config.steady_tol > 0.0) || cfg.nozzle_config.max_steps < 1)
      throw config_error("nozzle solver settings out of range");
    if (cfg.calib_n_random < 2) throw config_error("nozzle.calib_n_random must be >= 2");
    cfg.flow_bc.validate();
    if (n.contains("control_points")) {
      if (!n["control_points"].is_array() || n["control_points"].size() < 3)
        throw config_error("nozzle.control_points must list at least 3 [x, A] pairs");
      cfg.control_points.clear();
      for (const auto& p : n["control_points"]) {
        if (!p.is_array() || p.size() != 2)
          throw config_error("nozzle.control_points entries must be [x, A] pairs");
        cfg.control_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
    }
  }

  if (j.contains("objective")) {
    const json& o = j["objective"];
    reject_unknown(o, {"kind", "u_target", "control_penalty"}, "objective");
    const std::string kind = str(o, "kind", "target_tracking");
    if (kind == "target_tracking")
      cfg.objective.kind = ObjectiveSpec::Kind::target_tracking;
    else if (kind == "constant")
      cfg.objective.kind = ObjectiveSpec::Kind::constant;
    else
      throw config_error("objective.kind must be 'target_tracking' or 'constant'");
    cfg.objective.u_target = num(o, "u_target", cfg.objective.u_target);
    cfg.objective.control_penalty = num(o, "control_penalty", cfg.objective.control_penalty);
  }

  cfg.gradient_acceptance = num(j, "gradient_acceptance", cfg.gradient_acceptance);
  if (!(cfg.gradient_acceptance > 0.0))
    throw config_error("gradient_acceptance must be positive");

  // construction-level validation (spline shape etc.)
  if (cfg.experiment == ExperimentConfig::Case::nozzle_eos) cfg.make_area();
  if (cfg.experiment == ExperimentConfig::Case::porous1d) cfg.make_basis();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace twin::cli
