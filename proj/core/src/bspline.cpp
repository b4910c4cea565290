#include "twinmodel/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "twinmodel/errors.hpp"

namespace twin {

BsplineArea::BsplineArea(std::vector<std::array<double, 2>> control_points)
    : points_(std::move(control_points)) {
  const int n = static_cast<int>(points_.size());
  if (n < 3) throw argument_error("BsplineArea: at least 3 control points required");
  for (int p = 1; p < n; ++p)
    if (!(points_[p][0] > points_[p - 1][0]))
      throw argument_error("BsplineArea: control abscissae must be strictly ascending");

  // clamped uniform knots: [0,0,0,1,2,...,n-3,n-2,n-2,n-2]
  knots_.assign(n + 3, 0.0);
  for (int i = 0; i < n + 3; ++i)
    knots_[i] = std::clamp(static_cast<double>(i - 2), 0.0, static_cast<double>(n - 2));

  // positivity of the area over the domain (sampled)
  const int samples = 20 * (n - 2);
  for (int s = 0; s <= samples; ++s) {
    const double t = param_max() * s / samples;
    if (!(eval_param(t).area > 0.0))
      throw argument_error("BsplineArea: area must stay positive over the domain");
  }
}

void BsplineArea::basis_at(double t, std::span<double> values, std::span<double> derivs) const {
  const int n = num_points();
  const int degree = 2;
  // Cox-de Boor on the full basis; n is small so the O(n^2) sweep is fine.
  std::vector<double> n0(n + 2, 0.0), n1(n + 1, 0.0);
  const double tmax = param_max();
  for (int i = 0; i < n + 2; ++i) {
    if (t < tmax)
      n0[i] = (knots_[i] <= t && t < knots_[i + 1]) ? 1.0 : 0.0;
    else
      n0[i] = (knots_[i] < knots_[i + 1] && knots_[i + 1] >= tmax && knots_[i] <= t) ? 1.0 : 0.0;
  }
  auto ratio = [](double num, double den) { return den != 0.0 ? num / den : 0.0; };
  for (int i = 0; i < n + 1; ++i) {
    n1[i] = ratio(t - knots_[i], knots_[i + 1] - knots_[i]) * n0[i] +
            ratio(knots_[i + 2] - t, knots_[i + 2] - knots_[i + 1]) * n0[i + 1];
  }
  for (int i = 0; i < n; ++i) {
    values[i] = ratio(t - knots_[i], knots_[i + 2] - knots_[i]) * n1[i] +
                ratio(knots_[i + 3] - t, knots_[i + 3] - knots_[i + 1]) * n1[i + 1];
    derivs[i] = degree * (ratio(n1[i], knots_[i + 2] - knots_[i]) -
                          ratio(n1[i + 1], knots_[i + 3] - knots_[i + 1]));
  }
}

BsplineArea::CurvePoint BsplineArea::eval_param(double t) const {
  const int n = num_points();
  std::vector<double> v(n), d(n);
  basis_at(t, v, d);
  CurvePoint out{0, 0, 0, 0};
  for (int p = 0; p < n; ++p) {
    out.x += v[p] * points_[p][0];
    out.area += v[p] * points_[p][1];
    out.dx_dt += d[p] * points_[p][0];
    out.darea_dt += d[p] * points_[p][1];
  }
  return out;
}

double BsplineArea::param_for_x(double x) const {
  const double eps = 1e-12 * std::max(1.0, std::abs(x_max() - x_min()));
  if (x < x_min() - eps || x > x_max() + eps)
    throw domain_error("BsplineArea: x outside the knot span");
  double lo = 0.0, hi = param_max();
  double t = std::clamp((x - x_min()) / (x_max() - x_min()) * param_max(), lo, hi);
  for (int it = 0; it < 100; ++it) {
    const CurvePoint c = eval_param(t);
    const double f = c.x - x;
    if (std::abs(f) <= 1e-15 * std::max(1.0, std::abs(x))) return t;
    if (f > 0.0)
      hi = t;
    else
      lo = t;
    double next = c.dx_dt > 0.0 ? t - f / c.dx_dt : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(1.0, std::abs(t)))
      return next;
    t = next;
  }
  return t;
}

double BsplineArea::area_at(double x) const { return eval_param(param_for_x(x)).area; }

void BsplineArea::area_jacobian(double x, std::span<double> d_xp, std::span<double> d_ap) const {
  const int n = num_points();
  const double t = param_for_x(x);
  std::vector<double> v(n), d(n);
  basis_at(t, v, d);
  CurvePoint c{0, 0, 0, 0};
  for (int p = 0; p < n; ++p) {
    c.dx_dt += d[p] * points_[p][0];
    c.darea_dt += d[p] * points_[p][1];
  }
  for (int p = 0; p < n; ++p) {
    d_ap[p] = v[p];
    d_xp[p] = c.dx_dt != 0.0 ? -c.darea_dt * v[p] / c.dx_dt : 0.0;
  }
}

std::string to_json(const BsplineArea& spline) {
  nlohmann::ordered_json j;
  j["control_points"] = nlohmann::ordered_json::array();
  for (const auto& p : spline.control_points()) j["control_points"].push_back({p[0], p[1]});
  return j.dump(2);
}

BsplineArea bspline_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("bspline_from_json: parse failure: ") + e.what());
  }
  if (!j.contains("control_points")) throw io_error("bspline_from_json: missing control_points");
  std::vector<std::array<double, 2>> pts;
  for (const auto& p : j["control_points"])
    pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return BsplineArea(std::move(pts));
}

void save_bspline(const BsplineArea& spline, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("save_bspline: cannot open " + path);
  out << to_json(spline) << "\n";
}

BsplineArea load_bspline(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("load_bspline: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return bspline_from_json(ss.str());
}

}  // namespace twin
