#include "twinmodel/eos.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "twinmodel/errors.hpp"

namespace twin {

ReferenceEos::ReferenceEos(Kind kind, double gamma, double a, double b)
    : kind_(kind), gamma_(gamma), a_(a), b_(b) {
  if (!(gamma_ > 1.0)) throw argument_error("ReferenceEos: gamma must exceed 1");
  if (a_ < 0.0 || b_ < 0.0) throw argument_error("ReferenceEos: constants must be nonnegative");
}

ReferenceEos ReferenceEos::ideal(double gamma) { return ReferenceEos(Kind::ideal, gamma, 0, 0); }

ReferenceEos ReferenceEos::van_der_waals(double a, double b, double gamma) {
  return ReferenceEos(Kind::vdw, gamma, a, b);
}

ReferenceEos ReferenceEos::redlich_kwong(double a, double b, double gamma) {
  return ReferenceEos(Kind::rk, gamma, a, b);
}

ReferenceEos ReferenceEos::from_name(const std::string& name, double a, double b, double gamma) {
  if (name == "ideal") return ideal(gamma);
  if (name == "vdw") return van_der_waals(a, b, gamma);
  if (name == "rk") return redlich_kwong(a, b, gamma);
  throw argument_error("ReferenceEos: unknown kind '" + name + "'");
}

std::string ReferenceEos::name() const {
  switch (kind_) {
    case Kind::ideal: return "ideal";
    case Kind::vdw: return "vdw";
    case Kind::rk: return "rk";
  }
  return "?";
}

EosEval ReferenceEos::evaluate(double rho, double U) const {
  const double gm1 = gamma_ - 1.0;
  EosEval out;
  switch (kind_) {
    case Kind::ideal:
      out.p = gm1 * U;
      out.dp_drho = 0.0;
      out.dp_dU = gm1;
      return out;
    case Kind::vdw: {
      const double denom = 1.0 - b_ * rho;
      if (!(denom > 0.0)) throw domain_error("van der Waals: b*rho >= 1");
      out.p = gm1 * U / denom - a_ * rho * rho;
      out.dp_drho = gm1 * U * b_ / (denom * denom) - 2.0 * a_ * rho;
      out.dp_dU = gm1 / denom;
      return out;
    }
    case Kind::rk: {
      const double denom = 1.0 - b_ * rho;
      if (!(denom > 0.0)) throw domain_error("Redlich-Kwong: b*rho >= 1");
      if (!(U > 0.0)) throw domain_error("Redlich-Kwong: U must be positive");
      if (rho < 0.0) throw domain_error("Redlich-Kwong: rho must be nonnegative");
      const double w = gm1 * U;
      const double sqrt_w = std::exp(0.5 * std::log(w));  // guarded fractional power
      const double onepb = 1.0 + b_ * rho;
      const double rho52 = rho > 0.0 ? std::exp(2.5 * std::log(rho)) : 0.0;
      const double rho32 = rho > 0.0 ? std::exp(1.5 * std::log(rho)) : 0.0;
      const double term2 = a_ * rho52 / (sqrt_w * onepb);
      out.p = w / denom - term2;
      out.dp_drho = w * b_ / (denom * denom) -
                    a_ / sqrt_w * (2.5 * rho32 * onepb - rho52 * b_) / (onepb * onepb);
      out.dp_dU = gm1 / denom + 0.5 * term2 * gm1 / w;
      return out;
    }
  }
  return out;
}

ParamEos::ParamEos(std::vector<double> rho_centers, std::vector<double> u_centers,
                   double sigma_rho, double sigma_u, std::vector<double> alpha, double p0)
    : rho_centers_(std::move(rho_centers)),
      u_centers_(std::move(u_centers)),
      sigma_rho_(sigma_rho),
      sigma_u_(sigma_u),
      alpha_(std::move(alpha)),
      p0_(p0) {
  if (rho_centers_.empty() || u_centers_.empty())
    throw argument_error("ParamEos: at least one center per axis required");
  for (std::size_t i = 1; i < rho_centers_.size(); ++i)
    if (!(rho_centers_[i] > rho_centers_[i - 1]))
      throw argument_error("ParamEos: rho centers must be strictly ascending");
  for (std::size_t j = 1; j < u_centers_.size(); ++j)
    if (!(u_centers_[j] > u_centers_[j - 1]))
      throw argument_error("ParamEos: U centers must be strictly ascending");
  if (!(sigma_rho_ > 0.0) || !(sigma_u_ > 0.0))
    throw argument_error("ParamEos: widths must be positive");
  if (alpha_.size() != rho_centers_.size() * u_centers_.size())
    throw argument_error("ParamEos: alpha size must be n_rho * n_U");
  for (double a : alpha_)
    if (!(a >= 0.0)) throw argument_error("ParamEos: alpha must be nonnegative");
}

void ParamEos::basis_rho(double rho, std::span<double> out) const {
  for (int i = 0; i < n_rho(); ++i) {
    const double d = rho - rho_centers_[i];
    out[i] = std::exp(-d * d / sigma_rho_);
  }
}

void ParamEos::basis_u(double U, std::span<double> out) const {
  for (int j = 0; j < n_u(); ++j)
    out[j] = 0.5 * (std::tanh((U - u_centers_[j]) / sigma_u_) + 1.0);
}

EosEval ParamEos::evaluate(double rho, double U) const {
  const int nr = n_rho(), nu = n_u();
  std::vector<double> r(nr), rp(nr), s(nu), sp(nu);
  for (int i = 0; i < nr; ++i) {
    const double d = rho - rho_centers_[i];
    r[i] = std::exp(-d * d / sigma_rho_);
    rp[i] = -2.0 * d / sigma_rho_ * r[i];
  }
  for (int j = 0; j < nu; ++j) {
    const double t = std::tanh((U - u_centers_[j]) / sigma_u_);
    s[j] = 0.5 * (t + 1.0);
    sp[j] = (1.0 - t * t) / (2.0 * sigma_u_);
  }
  EosEval out;
  out.p = p0_;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nu; ++j) {
      const double a = alpha_[i * nu + j];
      out.p += a * r[i] * s[j];
      out.dp_drho += a * rp[i] * s[j];
      out.dp_dU += a * r[i] * sp[j];
    }
  }
  return out;
}

void ParamEos::param_derivs(double rho, double U, std::span<double> out) const {
  const int nr = n_rho(), nu = n_u();
  std::vector<double> r(nr), s(nu);
  basis_rho(rho, r);
  basis_u(U, s);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nu; ++j) out[i * nu + j] = r[i] * s[j];
  out[nr * nu] = 1.0;
}

void ParamEos::set_params(std::span<const double> packed) {
  if (static_cast<int>(packed.size()) != num_params())
    throw argument_error("ParamEos::set_params: wrong parameter count");
  for (std::size_t i = 0; i + 1 < packed.size(); ++i)
    if (!(packed[i] >= 0.0)) throw argument_error("ParamEos::set_params: alpha must be >= 0");
  std::copy(packed.begin(), packed.end() - 1, alpha_.begin());
  p0_ = packed.back();
}

std::vector<double> ParamEos::packed_params() const {
  std::vector<double> out(alpha_);
  out.push_back(p0_);
  return out;
}

namespace {
std::vector<double> linspace_centers(double lo, double hi, int n) {
  std::vector<double> c(n);
  if (n == 1) {
    c[0] = 0.5 * (lo + hi);
  } else {
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) c[i] = lo + i * step;
    c.back() = hi;
  }
  return c;
}
}  // namespace

ParamEos build_param_eos(std::span<const double> rho_cloud, std::span<const double> u_cloud,
                         int n_rho, int n_u) {
  if (rho_cloud.empty() || u_cloud.empty())
    throw argument_error("build_param_eos: empty state cloud");
  if (n_rho < 1 || n_u < 1) throw argument_error("build_param_eos: center counts must be >= 1");
  const auto [rlo, rhi] = std::minmax_element(rho_cloud.begin(), rho_cloud.end());
  const auto [ulo, uhi] = std::minmax_element(u_cloud.begin(), u_cloud.end());
  if (!(*rhi > *rlo)) throw degenerate_range_error("build_param_eos: degenerate rho range");
  if (!(*uhi > *ulo)) throw degenerate_range_error("build_param_eos: degenerate U range");
  const double sig_r = (*rhi - *rlo) / n_rho;
  const double sig_u = (*uhi - *ulo) / n_u;
  return ParamEos(linspace_centers(*rlo, *rhi, n_rho), linspace_centers(*ulo, *uhi, n_u), sig_r,
                  sig_u, std::vector<double>(static_cast<std::size_t>(n_rho) * n_u, 0.0), 0.0);
}

namespace {
inline double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}
}  // namespace

StateHull convex_hull(std::span<const std::array<double, 2>> points) {
  if (points.empty()) throw argument_error("convex_hull: at least one point required");
  std::vector<std::array<double, 2>> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  StateHull hull;
  const int n = static_cast<int>(pts.size());
  if (n <= 2) {
    hull.vertices = pts;
    hull.degenerate = true;
    return hull;
  }
  std::vector<std::array<double, 2>> h(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {  // upper chain
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  hull.vertices = std::move(h);
  hull.degenerate = hull.vertices.size() < 3;
  return hull;
}

bool StateHull::contains(double rho, double U) const {
  if (vertices.empty()) return false;
  const std::array<double, 2> p{rho, U};
  if (degenerate) {
    // point-on-segment (or point) test with a relative tolerance
    if (vertices.size() == 1)
      return std::abs(p[0] - vertices[0][0]) <= 1e-12 * std::max(1.0, std::abs(p[0])) &&
             std::abs(p[1] - vertices[0][1]) <= 1e-12 * std::max(1.0, std::abs(p[1]));
    const auto& a = vertices.front();
    const auto& b = vertices.back();
    const double len2 = (b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1]);
    const double t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) /
                     std::max(len2, 1e-300);
    if (t < -1e-12 || t > 1.0 + 1e-12) return false;
    const double px = a[0] + t * (b[0] - a[0]);
    const double py = a[1] + t * (b[1] - a[1]);
    const double scale = std::sqrt(len2);
    return std::hypot(p[0] - px, p[1] - py) <= 1e-10 * std::max(1.0, scale);
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % vertices.size()];
    const double c = cross(a, b, p);
    const double scale = std::hypot(b[0] - a[0], b[1] - a[1]) *
                         std::max(1.0, std::hypot(p[0] - a[0], p[1] - a[1]));
    if (c < -1e-12 * scale) return false;
  }
  return true;
}

std::string to_json(const ParamEos& eos) {
  nlohmann::ordered_json j;
  j["rho_centers"] = eos.rho_centers();
  j["U_centers"] = eos.u_centers();
  j["sigma_rho"] = eos.sigma_rho();
  j["sigma_U"] = eos.sigma_u();
  j["alpha"] = eos.alpha();
  j["p0"] = eos.p0();
  return j.dump(2);
}

ParamEos param_eos_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("param_eos_from_json: parse failure: ") + e.what());
  }
  for (const char* key : {"rho_centers", "U_centers", "sigma_rho", "sigma_U", "alpha", "p0"})
    if (!j.contains(key)) throw io_error(std::string("param_eos_from_json: missing ") + key);
  return ParamEos(j["rho_centers"].get<std::vector<double>>(),
                  j["U_centers"].get<std::vector<double>>(), j["sigma_rho"].get<double>(),
                  j["sigma_U"].get<double>(), j["alpha"].get<std::vector<double>>(),
                  j["p0"].get<double>());
}

void save_param_eos(const ParamEos& eos, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("save_param_eos: cannot open " + path);
  out << to_json(eos) << "\n";
}

ParamEos load_param_eos(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("load_param_eos: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return param_eos_from_json(ss.str());
}

std::string to_json(const StateHull& hull) {
  nlohmann::ordered_json j;
  j["vertices"] = nlohmann::ordered_json::array();
  for (const auto& v : hull.vertices) j["vertices"].push_back({v[0], v[1]});
  j["degenerate"] = hull.degenerate;
  return j.dump(2);
}

void save_hull(const StateHull& hull, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("save_hull: cannot open " + path);
  out << to_json(hull) << "\n";
}

double invert_internal_energy(const StateEquation& eos, double rho, double p_target,
                              double u_guess) {
  double u = std::max(u_guess, 1e-12);
  auto f = [&](double uu) { return eos.pressure(rho, uu) - p_target; };

  // expand a bracket [ulo, uhi] with f(ulo) <= 0 <= f(uhi)
  double ulo = u, uhi = u;
  double flo = f(ulo), fhi = flo;
  for (int it = 0; it < 200 && flo > 0.0; ++it) {
    ulo *= 0.5;
    if (ulo < 1e-300) throw domain_error("invert_internal_energy: no lower bracket");
    flo = f(ulo);
  }
  if (flo > 0.0) throw domain_error("invert_internal_energy: no lower bracket");
  for (int it = 0; it < 200 && fhi < 0.0; ++it) {
    uhi *= 2.0;
    if (uhi > 1e300) throw domain_error("invert_internal_energy: no upper bracket");
    fhi = f(uhi);
  }
  if (fhi < 0.0) throw domain_error("invert_internal_energy: no upper bracket");

  const double ptol = 1e-14 * std::max(1.0, std::abs(p_target));
  u = 0.5 * (ulo + uhi);
  for (int it = 0; it < 200; ++it) {
    const EosEval e = eos.evaluate(rho, u);
    const double fu = e.p - p_target;
    if (std::abs(fu) <= ptol) return u;
    if (fu > 0.0)
      uhi = u;
    else
      ulo = u;
    double next = u;
    if (e.dp_dU > 0.0) next = u - fu / e.dp_dU;  // Newton, else bisect
    if (!(next > ulo && next < uhi)) next = 0.5 * (ulo + uhi);
    if (std::abs(next - u) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(u))
      return next;
    u = next;
  }
  return u;
}

}  // namespace twin
