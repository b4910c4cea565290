#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace twin {

/// Quadratic (degree-2) clamped B-spline curve (x(t), A(t)) through control
/// points (x_p, A_p). The clamped end knots make the curve interpolate the
/// first and last control points; strictly ascending x_p keeps x(t) monotone
/// so A(x) is well defined. The first and last points are the frozen
/// endpoints; interior points are the free geometry parameters.
class BsplineArea {
 public:
  explicit BsplineArea(std::vector<std::array<double, 2>> control_points);

  int num_points() const { return static_cast<int>(points_.size()); }
  const std::vector<std::array<double, 2>>& control_points() const { return points_; }

  double x_min() const { return points_.front()[0]; }
  double x_max() const { return points_.back()[0]; }

  /// A(x); throws domain_error for x outside [x_min, x_max].
  double area_at(double x) const;

  /// dA(x)/dx_p and dA(x)/dA_p for every control point. The ordinate
  /// sensitivity is the basis value N_p(t); the abscissa sensitivity follows
  /// from differentiating the x(t)=x constraint: -A'(t) N_p(t) / x'(t).
  void area_jacobian(double x, std::span<double> d_xp, std::span<double> d_ap) const;

  /// Curve point and tangent at parameter t in [0, param_max].
  struct CurvePoint {
    double x, area, dx_dt, darea_dt;
  };
  CurvePoint eval_param(double t) const;
  double param_max() const { return static_cast<double>(num_points() - 2); }

 private:
  void basis_at(double t, std::span<double> values, std::span<double> derivs) const;
  double param_for_x(double x) const;

  std::vector<std::array<double, 2>> points_;
  std::vector<double> knots_;
};

/// Geometry artifact: {"control_points": [[x, A], ...]}.
std::string to_json(const BsplineArea& spline);
BsplineArea bspline_from_json(const std::string& text);
void save_bspline(const BsplineArea& spline, const std::string& path);
BsplineArea load_bspline(const std::string& path);

}  // namespace twin
