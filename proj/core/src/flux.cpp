#include "twinmodel/flux.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "twinmodel/errors.hpp"

namespace twin {

BuckleyLeverettFlux::BuckleyLeverettFlux(double a_const) : a_(a_const) {
  if (!(a_ >= 0.0)) throw argument_error("BuckleyLeverettFlux: A must be nonnegative");
}

double BuckleyLeverettFlux::value(double u) const {
  const double om = 1.0 - u;
  return u * u / (1.0 + a_ * om * om);
}

double BuckleyLeverettFlux::slope(double u) const {
  const double om = 1.0 - u;
  const double d = 1.0 + a_ * om * om;
  const double dp = -2.0 * a_ * om;
  return (2.0 * u * d - u * u * dp) / (d * d);
}

double BuckleyLeverettFlux::curvature(double u) const {
  const double om = 1.0 - u;
  const double d = 1.0 + a_ * om * om;
  const double dp = -2.0 * a_ * om;
  const double dpp = 2.0 * a_;
  const double num = (2.0 * d - u * u * dpp) * d - 2.0 * dp * (2.0 * u * d - u * u * dp);
  return num / (d * d * d);
}

SigmoidFluxBasis::SigmoidFluxBasis(std::vector<double> centers, double width)
    : centers_(std::move(centers)), width_(width) {
  if (centers_.empty()) throw argument_error("SigmoidFluxBasis: at least one center required");
  if (!(width_ > 0.0)) throw argument_error("SigmoidFluxBasis: width must be positive");
  for (std::size_t k = 1; k < centers_.size(); ++k)
    if (!(centers_[k] > centers_[k - 1]))
      throw argument_error("SigmoidFluxBasis: centers must be strictly ascending");
}

SigmoidFluxBasis SigmoidFluxBasis::equispaced(int m, double lo, double hi, double sigma) {
  if (m < 1) throw argument_error("SigmoidFluxBasis: m >= 1 required");
  if (!(hi > lo)) throw argument_error("SigmoidFluxBasis: hi must exceed lo");
  std::vector<double> centers(m);
  if (m == 1) {
    centers[0] = 0.5 * (lo + hi);
  } else {
    const double step = (hi - lo) / (m - 1);
    for (int k = 0; k < m; ++k) centers[k] = lo + k * step;
  }
  if (sigma <= 0.0) sigma = (hi - lo) / m;
  return SigmoidFluxBasis(std::move(centers), sigma);
}

double SigmoidFluxBasis::eval_one(int k, double u) const {
  return 0.5 * (std::tanh((u - centers_[k]) / width_) + 1.0);
}

double SigmoidFluxBasis::slope_one(int k, double u) const {
  const double t = std::tanh((u - centers_[k]) / width_);
  return (1.0 - t * t) / (2.0 * width_);
}

double SigmoidFluxBasis::curvature_one(int k, double u) const {
  const double t = std::tanh((u - centers_[k]) / width_);
  return -t * (1.0 - t * t) / (width_ * width_);
}

void SigmoidFluxBasis::eval(double u, std::span<double> g) const {
  for (int k = 0; k < size(); ++k) g[k] = eval_one(k, u);
}

void SigmoidFluxBasis::eval_slope(double u, std::span<double> g) const {
  for (int k = 0; k < size(); ++k) g[k] = slope_one(k, u);
}

std::vector<double> basis_eval(const SigmoidFluxBasis& basis, double u) {
  std::vector<double> g(basis.size());
  basis.eval(u, g);
  return g;
}

TwinFlux::TwinFlux(SigmoidFluxBasis basis, std::vector<double> coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (static_cast<int>(coefficients_.size()) != basis_.size())
    throw argument_error("TwinFlux: coefficient count must match basis size");
  set_coefficients(coefficients_);
}

void TwinFlux::set_coefficients(std::vector<double> xi) {
  if (static_cast<int>(xi.size()) != basis_.size())
    throw argument_error("TwinFlux: coefficient count must match basis size");
  for (double v : xi)
    if (!(v >= 0.0)) throw argument_error("TwinFlux: coefficients must be nonnegative");
  coefficients_ = std::move(xi);
}

double TwinFlux::value(double u) const {
  double sum = 0.0;
  for (int k = 0; k < basis_.size(); ++k) sum += coefficients_[k] * basis_.eval_one(k, u);
  return sum;
}

double TwinFlux::slope(double u) const {
  double sum = 0.0;
  for (int k = 0; k < basis_.size(); ++k) sum += coefficients_[k] * basis_.slope_one(k, u);
  return sum;
}

double TwinFlux::curvature(double u) const {
  double sum = 0.0;
  for (int k = 0; k < basis_.size(); ++k) sum += coefficients_[k] * basis_.curvature_one(k, u);
  return sum;
}

void TwinFlux::param_value_derivs(double u, std::span<double> out) const {
  basis_.eval(u, out);
}

void TwinFlux::param_slope_derivs(double u, std::span<double> out) const {
  basis_.eval_slope(u, out);
}

std::string to_json(const TwinFlux& model) {
  nlohmann::ordered_json j;
  j["centers"] = model.basis().centers();
  j["sigma"] = model.basis().width();
  j["xi"] = model.coefficients();
  return j.dump(2);
}

TwinFlux twin_flux_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("twin_flux_from_json: parse failure: ") + e.what());
  }
  if (!j.contains("centers") || !j.contains("sigma") || !j.contains("xi"))
    throw io_error("twin_flux_from_json: missing centers/sigma/xi");
  SigmoidFluxBasis basis(j["centers"].get<std::vector<double>>(), j["sigma"].get<double>());
  return TwinFlux(std::move(basis), j["xi"].get<std::vector<double>>());
}

void save_twin_flux(const TwinFlux& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("save_twin_flux: cannot open " + path);
  out << to_json(model) << "\n";
}

TwinFlux load_twin_flux(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("load_twin_flux: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return twin_flux_from_json(ss.str());
}

}  // namespace twin
