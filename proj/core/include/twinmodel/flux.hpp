#pragma once

#include <span>
#include <string>
#include <vector>

namespace twin {

/// Scalar flux function F(u) with analytic derivatives. Models carrying
/// tunable coefficients also expose the parameter derivatives of F and F'
/// needed by the reverse sweeps. Implementations are immutable value types.
class FluxModel {
 public:
  virtual ~FluxModel() = default;

  virtual double value(double u) const = 0;
  /// dF/du (analytic, not finite-differenced).
  virtual double slope(double u) const = 0;
  /// d2F/du2 (needed for the state Jacobian of the dissipation term).
  virtual double curvature(double u) const = 0;

  virtual int num_params() const { return 0; }
  /// dF/dxi_j, j = 0..num_params()-1.
  virtual void param_value_derivs(double /*u*/, std::span<double> /*out*/) const {}
  /// d(dF/du)/dxi_j.
  virtual void param_slope_derivs(double /*u*/, std::span<double> /*out*/) const {}
};

/// Two-phase porous-media flux F(u) = u^2 / (1 + A(1-u)^2).
class BuckleyLeverettFlux final : public FluxModel {
 public:
  explicit BuckleyLeverettFlux(double a_const);

  double value(double u) const override;
  double slope(double u) const override;
  double curvature(double u) const override;

  double a_const() const { return a_; }

 private:
  double a_;
};

/// Family of sigmoid bump integrals g_k(u) = (tanh((u - eta_k)/sigma) + 1)/2
/// with strictly ascending centers and a shared width.
class SigmoidFluxBasis {
 public:
  SigmoidFluxBasis(std::vector<double> centers, double width);

  /// m centers equally spaced on [lo, hi] with width sigma (default 1.2/m).
  static SigmoidFluxBasis equispaced(int m, double lo, double hi, double sigma = 0.0);

  int size() const { return static_cast<int>(centers_.size()); }
  double center(int k) const { return centers_[k]; }
  double width() const { return width_; }
  const std::vector<double>& centers() const { return centers_; }

  double eval_one(int k, double u) const;
  double slope_one(int k, double u) const;
  double curvature_one(int k, double u) const;

  void eval(double u, std::span<double> g) const;
  void eval_slope(double u, std::span<double> g) const;

 private:
  std::vector<double> centers_;
  double width_;
};

/// Evaluates all basis components at u (convenience for tests/reports).
std::vector<double> basis_eval(const SigmoidFluxBasis& basis, double u);

/// Parameterized twin flux G(u) = sum_k xi_k g_k(u), xi_k >= 0 so that the
/// flux is monotone increasing.
class TwinFlux final : public FluxModel {
 public:
  TwinFlux(SigmoidFluxBasis basis, std::vector<double> coefficients);

  double value(double u) const override;
  double slope(double u) const override;
  double curvature(double u) const override;

  int num_params() const override { return basis_.size(); }
  void param_value_derivs(double u, std::span<double> out) const override;
  void param_slope_derivs(double u, std::span<double> out) const override;

  const SigmoidFluxBasis& basis() const { return basis_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  /// Replaces the coefficient vector; values must be nonnegative.
  void set_coefficients(std::vector<double> xi);

 private:
  SigmoidFluxBasis basis_;
  std::vector<double> coefficients_;
};

/// Trained-model artifact format: {"centers": [...], "sigma": s, "xi": [...]}.
std::string to_json(const TwinFlux& model);
TwinFlux twin_flux_from_json(const std::string& text);
void save_twin_flux(const TwinFlux& model, const std::string& path);
TwinFlux load_twin_flux(const std::string& path);

}  // namespace twin
