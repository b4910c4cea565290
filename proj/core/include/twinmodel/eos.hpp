#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace twin {

/// Pressure and its analytic partials at one (rho, U) state, with U the
/// internal energy per volume.
struct EosEval {
  double p = 0.0;
  double dp_drho = 0.0;
  double dp_dU = 0.0;
};

/// Closure p = p(rho, U). Parameterized implementations expose dp/d(param).
class StateEquation {
 public:
  virtual ~StateEquation() = default;
  virtual EosEval evaluate(double rho, double U) const = 0;
  double pressure(double rho, double U) const { return evaluate(rho, U).p; }

  virtual int num_params() const { return 0; }
  /// dp/d(param_j) at (rho, U).
  virtual void param_derivs(double /*rho*/, double /*U*/, std::span<double> /*out*/) const {}

  virtual std::string name() const = 0;
};

/// Reference closed forms: ideal gas, van der Waals, Redlich-Kwong.
class ReferenceEos final : public StateEquation {
 public:
  enum class Kind { ideal, vdw, rk };

  static ReferenceEos ideal(double gamma = 1.4);
  static ReferenceEos van_der_waals(double a, double b, double gamma = 1.4);
  static ReferenceEos redlich_kwong(double a, double b, double gamma = 1.4);
  static ReferenceEos from_name(const std::string& name, double a, double b, double gamma = 1.4);

  EosEval evaluate(double rho, double U) const override;
  std::string name() const override;

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  double a_const() const { return a_; }
  double b_const() const { return b_; }

 private:
  ReferenceEos(Kind kind, double gamma, double a, double b);
  Kind kind_;
  double gamma_;
  double a_ = 0.0;
  double b_ = 0.0;
};

/// Parameterized state equation
///   p(rho, U) = sum_ij alpha_ij R_i(rho) S_j(U) + p0,
///   R_i = exp(-(rho - rho_i)^2 / sigma_rho),
///   S_j = (tanh((U - U_j)/sigma_U) + 1)/2,
/// with alpha >= 0 so that dp/dU >= 0 everywhere. Parameter layout:
/// alpha row-major (rho index outer), p0 last.
class ParamEos final : public StateEquation {
 public:
  ParamEos(std::vector<double> rho_centers, std::vector<double> u_centers, double sigma_rho,
           double sigma_u, std::vector<double> alpha, double p0);

  EosEval evaluate(double rho, double U) const override;
  int num_params() const override { return static_cast<int>(alpha_.size()) + 1; }
  void param_derivs(double rho, double U, std::span<double> out) const override;
  std::string name() const override { return "param"; }

  int n_rho() const { return static_cast<int>(rho_centers_.size()); }
  int n_u() const { return static_cast<int>(u_centers_.size()); }
  const std::vector<double>& rho_centers() const { return rho_centers_; }
  const std::vector<double>& u_centers() const { return u_centers_; }
  double sigma_rho() const { return sigma_rho_; }
  double sigma_u() const { return sigma_u_; }
  const std::vector<double>& alpha() const { return alpha_; }
  double p0() const { return p0_; }

  /// Replaces [alpha..., p0] from a packed parameter vector (alpha >= 0).
  void set_params(std::span<const double> packed);
  std::vector<double> packed_params() const;

  void basis_rho(double rho, std::span<double> out) const;
  void basis_u(double U, std::span<double> out) const;

 private:
  std::vector<double> rho_centers_, u_centers_;
  double sigma_rho_, sigma_u_;
  std::vector<double> alpha_;  // n_rho x n_u row-major
  double p0_;
};

/// Skeleton with centers/widths from the state cloud ranges (linspace
/// inclusive of endpoints; a single center sits at the midpoint with width
/// equal to the full range), alpha = 0, p0 = 0.
ParamEos build_param_eos(std::span<const double> rho_cloud, std::span<const double> u_cloud,
                         int n_rho, int n_u);

/// Convex hull of the gray-box states in the (rho, U) plane, counterclockwise
/// vertices; collinear clouds are flagged degenerate. Membership is inclusive
/// of the boundary.
struct StateHull {
  std::vector<std::array<double, 2>> vertices;
  bool degenerate = false;
  bool contains(double rho, double U) const;
};

StateHull convex_hull(std::span<const std::array<double, 2>> points);

/// Artifact formats.
std::string to_json(const ParamEos& eos);
ParamEos param_eos_from_json(const std::string& text);
void save_param_eos(const ParamEos& eos, const std::string& path);
ParamEos load_param_eos(const std::string& path);
std::string to_json(const StateHull& hull);
void save_hull(const StateHull& hull, const std::string& path);

/// Solves p(rho, U) = p_target for U by safeguarded Newton/bisection on an
/// expanding bracket; requires dp/dU > 0 along the way. Used by the nozzle
/// boundary ghosts.
double invert_internal_energy(const StateEquation& eos, double rho, double p_target,
                              double u_guess);

}  // namespace twin
