#include "twinmodel/nozzle.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "nozzle_internal.hpp"
#include "twinmodel/errors.hpp"

namespace twin {

void FlowBc::validate() const {
  if (!(p_total_in > p_out) || !(p_out > 0.0))
    throw argument_error("FlowBc: need p_total_in > p_out > 0");
  if (!(rho_ref > 0.0)) throw argument_error("FlowBc: rho_ref must be positive");
}

NozzleState::NozzleState(GridPtr grid, const FlowBc& bc)
    : grid_(std::move(grid)),
      q_(grid_ ? 3 * grid_->n_cells() : 0, 0.0),
      rho_scale_(bc.rho_ref),
      p_scale_(bc.p_total_in) {
  if (!grid_) throw argument_error("NozzleState: grid required");
  bc.validate();
}

double NozzleState::internal_energy(int i) const {
  const double r = rho(i);
  const double m = momentum(i);
  return energy(i) - 0.5 * m * m / r;
}

std::array<double, 2> NozzleState::state_point(int i) const {
  return {rho(i) * rho_scale_, internal_energy(i) * p_scale_};
}

std::array<SteadyField, 3> NozzleState::to_fields() const {
  SteadyField r(grid_), u(grid_), e(grid_);
  for (int i = 0; i < n_cells(); ++i) {
    r.at(i) = rho(i);
    u.at(i) = velocity(i);
    e.at(i) = energy(i) / rho(i);
  }
  return {std::move(r), std::move(u), std::move(e)};
}

namespace nozzle_internal {

AreaProfile build_area_profile(const BsplineArea& spline, const Grid1D& grid) {
  const int n = grid.n_cells();
  const int np = spline.num_points();
  AreaProfile prof;
  prof.n_pts = np;
  prof.face.resize(n + 1);
  prof.cell.resize(n);
  prof.dface_dx.assign(static_cast<std::size_t>(n + 1) * np, 0.0);
  prof.dface_da.assign(static_cast<std::size_t>(n + 1) * np, 0.0);
  prof.dcell_dx.assign(static_cast<std::size_t>(n) * np, 0.0);
  prof.dcell_da.assign(static_cast<std::size_t>(n) * np, 0.0);

  std::vector<double> edges(n + 1);
  edges[0] = grid.x_center(0) - 0.5 * grid.x_width(0);
  for (int i = 0; i < n; ++i) edges[i + 1] = edges[i] + grid.x_width(i);
  // clip rounding at the ends into the spline domain
  edges[0] = std::max(edges[0], spline.x_min());
  edges[n] = std::min(edges[n], spline.x_max());

  for (int f = 0; f <= n; ++f) {
    prof.face[f] = spline.area_at(edges[f]);
    spline.area_jacobian(edges[f],
                         {prof.dface_dx.data() + static_cast<std::size_t>(f) * np,
                          static_cast<std::size_t>(np)},
                         {prof.dface_da.data() + static_cast<std::size_t>(f) * np,
                          static_cast<std::size_t>(np)});
  }
  for (int i = 0; i < n; ++i) {
    prof.cell[i] = spline.area_at(grid.x_center(i));
    spline.area_jacobian(grid.x_center(i),
                         {prof.dcell_dx.data() + static_cast<std::size_t>(i) * np,
                          static_cast<std::size_t>(np)},
                         {prof.dcell_da.data() + static_cast<std::size_t>(i) * np,
                          static_cast<std::size_t>(np)});
  }
  return prof;
}

Assembler::Assembler(const StateEquation& eos, const BsplineArea& spline, const FlowBc& bc,
                     const Grid1D& grid, const NozzleConfig& config)
    : eos_(&eos), spline_(&spline), bc_(bc), grid_(&grid), config_(config) {
  bc_.validate();
  if (grid.n_cells() < 2) throw argument_error("nozzle: at least two cells required");
  const double x_lo = grid.x_center(0) - 0.5 * grid.x_width(0);
  const double x_hi = grid.x_center(grid.n_cells() - 1) + 0.5 * grid.x_width(grid.n_cells() - 1);
  const double eps = 1e-9 * (x_hi - x_lo);
  if (spline.x_min() > x_lo + eps || spline.x_max() < x_hi - eps)
    throw argument_error("nozzle: spline domain does not cover the grid");

  nd_ = NdEos{eos_, bc_.rho_ref, bc_.p_total_in};
  n_ = grid.n_cells();
  p_out_nd_ = bc_.p_out / bc_.p_total_in;
  p_floor_ = 0.05 * p_out_nd_;
  profile_ = build_area_profile(spline, grid);

  // Global Rusanov coefficient from the boundary data alone (an ideal-gas
  // estimate with a safety factor); independent of the state and of the EOS
  // parameters so the discrete residual needs only first EOS partials.
  const double u_est = std::sqrt(2.0 * std::max(1.0 - p_out_nd_, 1e-3));
  const double c_est = std::sqrt(1.4);
  a_glob_ = config.wave_speed_safety * (u_est + c_est);
}

Thermo Assembler::thermo(const double* q) const {
  Thermo t;
  t.r = q[0];
  t.m = q[1];
  t.e = q[2];
  if (!(t.r > 1e-10) || !std::isfinite(t.r) || !std::isfinite(t.m) || !std::isfinite(t.e))
    throw domain_error("nozzle: nonphysical density");
  t.u = t.m / t.r;
  t.U = t.e - 0.5 * t.m * t.u;
  if (!(t.U > 1e-12)) throw domain_error("nozzle: nonphysical internal energy");
  const EosEval p = nd_.eval(t.r, t.U);
  t.p = p.p;
  t.p_r = p.dp_drho;
  t.p_U = p.dp_dU;
  if (!std::isfinite(t.p)) throw domain_error("nozzle: non-finite pressure");
  return t;
}

Vec3 Assembler::euler_flux(const Thermo& t) const {
  return {t.m, t.m * t.u + t.p, (t.e + t.p) * t.u};
}

Mat3 Assembler::flux_jacobian(const Thermo& t) const {
  const double u = t.u;
  // dp/dq = p_r (1,0,0) + p_U (u^2/2, -u, 1)
  const Vec3 dp{t.p_r + 0.5 * t.p_U * u * u, -t.p_U * u, t.p_U};
  Mat3 a;
  a.row(0) << 0.0, 1.0, 0.0;
  a.row(1) << -u * u + dp(0), 2.0 * u + dp(1), dp(2);
  const double h = (t.e + t.p) / t.r;  // total specific enthalpy
  a.row(2) << u * (dp(0) - h), h + u * dp(1), u * (1.0 + dp(2));
  return a;
}

Assembler::Ghost Assembler::inlet_ghost(const Thermo& first) const {
  Ghost g;
  const double ug = first.u;
  const double rg = 1.0;
  const double p_raw = p_total_nd() - 0.5 * rg * ug * ug;
  const bool clamped = p_raw < p_floor_;
  const double pg = clamped ? p_floor_ : p_raw;
  const double Ug = nd_.invert_u(rg, pg, std::max(pg / 0.4, 1e-8));
  g.q << rg, rg * ug, Ug + 0.5 * rg * ug * ug;
  g.th = thermo(g.q.data());

  if (!(g.th.p_U > 0.0)) throw domain_error("nozzle: inlet ghost has dp/dU <= 0");
  const Vec3 du_dq{-first.u / first.r, 1.0 / first.r, 0.0};
  const double dp_du = clamped ? 0.0 : -rg * ug;
  const double dU_du = dp_du / g.th.p_U;
  const double de_du = dU_du + rg * ug;
  g.d_dq.setZero();
  g.d_dq.row(1) = rg * du_dq.transpose();
  g.d_dq.row(2) = de_du * du_dq.transpose();
  g.du_dalpha_factor = -1.0 / g.th.p_U;
  return g;
}

Assembler::Ghost Assembler::outlet_ghost(const Thermo& last) const {
  Ghost g;
  const double rg = last.r;
  const double ug = last.u;
  const double Ug = nd_.invert_u(rg, p_out_nd_, std::max(last.U, 1e-8));
  g.q << rg, rg * ug, Ug + 0.5 * rg * ug * ug;
  g.th = thermo(g.q.data());

  if (!(g.th.p_U > 0.0)) throw domain_error("nozzle: outlet ghost has dp/dU <= 0");
  const double dU_dr = -g.th.p_r / g.th.p_U;
  const Vec3 dr_dq{1.0, 0.0, 0.0};
  const Vec3 du_dq{-last.u / last.r, 1.0 / last.r, 0.0};
  g.d_dq.row(0) = dr_dq.transpose();
  g.d_dq.row(1) << 0.0, 1.0, 0.0;  // m_ghost = m_last
  g.d_dq.row(2) = (dU_dr + 0.5 * ug * ug) * dr_dq.transpose() + rg * ug * du_dq.transpose();
  g.du_dalpha_factor = -1.0 / g.th.p_U;
  return g;
}

void Assembler::residual(const Eigen::VectorXd& q, Eigen::VectorXd& r) const {
  std::vector<Thermo> cells(n_);
  for (int i = 0; i < n_; ++i) cells[i] = thermo(q.data() + 3 * i);
  const Ghost gl = inlet_ghost(cells.front());
  const Ghost gr = outlet_ghost(cells.back());

  auto flux_at = [&](int f) {
    const Thermo& tl = (f == 0) ? gl.th : cells[f - 1];
    const Thermo& tr = (f == n_) ? gr.th : cells[f];
    const Vec3 ql{tl.r, tl.m, tl.e};
    const Vec3 qr{tr.r, tr.m, tr.e};
    return Vec3(0.5 * (euler_flux(tl) + euler_flux(tr)) - 0.5 * a_glob_ * (qr - ql));
  };

  r.resize(3 * n_);
  Vec3 f_left = flux_at(0);
  for (int i = 0; i < n_; ++i) {
    const Vec3 f_right = flux_at(i + 1);
    const double af_l = profile_.face[i], af_r = profile_.face[i + 1];
    const double scale = 1.0 / (profile_.cell[i] * grid_->x_width(i));
    Vec3 res = (f_right * af_r - f_left * af_l) * scale;
    res(1) -= cells[i].p * (af_r - af_l) * scale;
    r.segment<3>(3 * i) = res;
    f_left = f_right;
  }
}

void Assembler::residual_and_jacobian(const Eigen::VectorXd& q, Eigen::VectorXd& r,
                                      SpMat& jac) const {
  std::vector<Thermo> cells(n_);
  for (int i = 0; i < n_; ++i) cells[i] = thermo(q.data() + 3 * i);
  const Ghost gl = inlet_ghost(cells.front());
  const Ghost gr = outlet_ghost(cells.back());

  r.resize(3 * n_);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(27) * n_);
  auto add_block = [&](int row_cell, int col_cell, const Mat3& block, double coeff) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double v = coeff * block(a, b);
        if (v != 0.0) trip.emplace_back(3 * row_cell + a, 3 * col_cell + b, v);
      }
  };

  const Mat3 ident = Mat3::Identity();
  struct FaceLin {
    Vec3 flux;
    Mat3 d_left;   // w.r.t. the left interior cell (ghost chain folded in)
    Mat3 d_right;  // w.r.t. the right interior cell
    int left_cell;
    int right_cell;
  };
  auto face_lin = [&](int f) {
    FaceLin out;
    const Thermo& tl = (f == 0) ? gl.th : cells[f - 1];
    const Thermo& tr = (f == n_) ? gr.th : cells[f];
    const Vec3 ql{tl.r, tl.m, tl.e};
    const Vec3 qr{tr.r, tr.m, tr.e};
    out.flux = 0.5 * (euler_flux(tl) + euler_flux(tr)) - 0.5 * a_glob_ * (qr - ql);
    const Mat3 dl = 0.5 * flux_jacobian(tl) + 0.5 * a_glob_ * ident;
    const Mat3 dr = 0.5 * flux_jacobian(tr) - 0.5 * a_glob_ * ident;
    if (f == 0) {
      out.left_cell = 0;
      out.d_left = dl * gl.d_dq;  // ghost depends on cell 0
      out.right_cell = 0;
      out.d_right = dr;
    } else if (f == n_) {
      out.left_cell = n_ - 1;
      out.d_left = dl;
      out.right_cell = n_ - 1;
      out.d_right = dr * gr.d_dq;  // ghost depends on cell n-1
    } else {
      out.left_cell = f - 1;
      out.d_left = dl;
      out.right_cell = f;
      out.d_right = dr;
    }
    return out;
  };

  FaceLin left = face_lin(0);
  for (int i = 0; i < n_; ++i) {
    FaceLin right = face_lin(i + 1);
    const double af_l = profile_.face[i], af_r = profile_.face[i + 1];
    const double scale = 1.0 / (profile_.cell[i] * grid_->x_width(i));

    Vec3 res = (right.flux * af_r - left.flux * af_l) * scale;
    res(1) -= cells[i].p * (af_r - af_l) * scale;
    r.segment<3>(3 * i) = res;

    add_block(i, right.left_cell, right.d_left, af_r * scale);
    add_block(i, right.right_cell, right.d_right, af_r * scale);
    add_block(i, left.left_cell, left.d_left, -af_l * scale);
    add_block(i, left.right_cell, left.d_right, -af_l * scale);

    // source term: -(0, p_i dA, 0)/(A dx)
    const Thermo& t = cells[i];
    const Vec3 dp{t.p_r + 0.5 * t.p_U * t.u * t.u, -t.p_U * t.u, t.p_U};
    const double coeff = -(af_r - af_l) * scale;
    for (int b = 0; b < 3; ++b)
      if (dp(b) != 0.0) trip.emplace_back(3 * i + 1, 3 * i + b, coeff * dp(b));

    left = right;
  }
  jac.resize(3 * n_, 3 * n_);
  jac.setFromTriplets(trip.begin(), trip.end());
  jac.makeCompressed();
}

Eigen::VectorXd Assembler::eos_param_vjp(const Eigen::VectorXd& q,
                                         const Eigen::VectorXd& psi) const {
  const int np = eos_->num_params();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(np);
  if (np == 0) return out;

  std::vector<Thermo> cells(n_);
  for (int i = 0; i < n_; ++i) cells[i] = thermo(q.data() + 3 * i);
  const Ghost gl = inlet_ghost(cells.front());
  const Ghost gr = outlet_ghost(cells.back());

  // omega_f = Af_f (psi_{f-1}/(Ac dx)_{f-1} - psi_f/(Ac dx)_f), boundary-safe
  auto omega = [&](int f) {
    Vec3 w = Vec3::Zero();
    if (f >= 1)
      w += psi.segment<3>(3 * (f - 1)) / (profile_.cell[f - 1] * grid_->x_width(f - 1));
    if (f <= n_ - 1) w -= psi.segment<3>(3 * f) / (profile_.cell[f] * grid_->x_width(f));
    return Vec3(profile_.face[f] * w);
  };

  std::vector<double> pa(np);
  // cell pressures: flux contribution 1/2 (omega_i + omega_{i+1}) . (0,1,u)
  // plus the area source
  for (int i = 0; i < n_; ++i) {
    const Vec3 w = 0.5 * (omega(i) + omega(i + 1));
    const double daf = profile_.face[i + 1] - profile_.face[i];
    const double w_cell = w(1) + w(2) * cells[i].u -
                          psi(3 * i + 1) * daf / (profile_.cell[i] * grid_->x_width(i));
    if (w_cell == 0.0) continue;
    nd_.param_derivs(cells[i].r, cells[i].U, pa);
    for (int j = 0; j < np; ++j) out(j) += w_cell * pa[j];
  }
  // Ghost energies: dU_ghost/dalpha = factor * p_alpha(ghost). The ghost
  // pressure itself is pinned by the boundary condition, so the explicit
  // p_alpha flux term must accompany the U-chain (their pressure parts
  // cancel; only the energy transport survives).
  {
    const Mat3 d = 0.5 * flux_jacobian(gl.th) + 0.5 * a_glob_ * Mat3::Identity();
    const Vec3 om = omega(0);
    const double w = om.dot(d.col(2)) * gl.du_dalpha_factor +
                     0.5 * (om(1) + om(2) * gl.th.u);
    if (w != 0.0) {
      nd_.param_derivs(gl.th.r, gl.th.U, pa);
      for (int j = 0; j < np; ++j) out(j) += w * pa[j];
    }
  }
  {
    const Mat3 d = 0.5 * flux_jacobian(gr.th) - 0.5 * a_glob_ * Mat3::Identity();
    const Vec3 om = omega(n_);
    const double w = om.dot(d.col(2)) * gr.du_dalpha_factor +
                     0.5 * (om(1) + om(2) * gr.th.u);
    if (w != 0.0) {
      nd_.param_derivs(gr.th.r, gr.th.U, pa);
      for (int j = 0; j < np; ++j) out(j) += w * pa[j];
    }
  }
  return out;
}

void Assembler::geometry_vjp(const Eigen::VectorXd& q, const Eigen::VectorXd& psi,
                             std::span<double> d_xp, std::span<double> d_ap) const {
  std::vector<Thermo> cells(n_);
  for (int i = 0; i < n_; ++i) cells[i] = thermo(q.data() + 3 * i);
  const Ghost gl = inlet_ghost(cells.front());
  const Ghost gr = outlet_ghost(cells.back());

  Eigen::VectorXd res(3 * n_);
  residual(q, res);

  auto flux_at = [&](int f) {
    const Thermo& tl = (f == 0) ? gl.th : cells[f - 1];
    const Thermo& tr = (f == n_) ? gr.th : cells[f];
    const Vec3 ql{tl.r, tl.m, tl.e};
    const Vec3 qr{tr.r, tr.m, tr.e};
    return Vec3(0.5 * (euler_flux(tl) + euler_flux(tr)) - 0.5 * a_glob_ * (qr - ql));
  };

  std::vector<double> g_face(n_ + 1, 0.0), g_cell(n_, 0.0);
  Vec3 fhat = flux_at(0);
  for (int i = 0; i <= n_; ++i) {
    if (i > 0) {
      // dR_{i-1}/dAf_i = [Fhat_i - (0, p_{i-1}, 0)]/(Ac dx)
      Vec3 v = fhat;
      v(1) -= cells[i - 1].p;
      g_face[i] += psi.segment<3>(3 * (i - 1)).dot(v) /
                   (profile_.cell[i - 1] * grid_->x_width(i - 1));
    }
    if (i < n_) {
      Vec3 v = -fhat;
      v(1) += cells[i].p;
      g_face[i] += psi.segment<3>(3 * i).dot(v) / (profile_.cell[i] * grid_->x_width(i));
      g_cell[i] = -psi.segment<3>(3 * i).dot(res.segment<3>(3 * i)) / profile_.cell[i];
      fhat = flux_at(i + 1);
    }
  }

  const int np = profile_.n_pts;
  for (int f = 0; f <= n_; ++f) {
    for (int p = 0; p < np; ++p) {
      d_xp[p] += g_face[f] * profile_.dface_dx[static_cast<std::size_t>(f) * np + p];
      d_ap[p] += g_face[f] * profile_.dface_da[static_cast<std::size_t>(f) * np + p];
    }
  }
  for (int i = 0; i < n_; ++i) {
    for (int p = 0; p < np; ++p) {
      d_xp[p] += g_cell[i] * profile_.dcell_dx[static_cast<std::size_t>(i) * np + p];
      d_ap[p] += g_cell[i] * profile_.dcell_da[static_cast<std::size_t>(i) * np + p];
    }
  }
}

double Assembler::mass_flux_out(const Eigen::VectorXd& q) const {
  const Thermo last = thermo(q.data() + 3 * (n_ - 1));
  const Ghost gr = outlet_ghost(last);
  const double fm = 0.5 * (last.m + gr.th.m) - 0.5 * a_glob_ * (gr.th.r - last.r);
  return profile_.face[n_] * fm;
}

double Assembler::mass_flux_in(const Eigen::VectorXd& q) const {
  const Thermo first = thermo(q.data());
  const Ghost gl = inlet_ghost(first);
  const double fm = 0.5 * (gl.th.m + first.m) - 0.5 * a_glob_ * (first.r - gl.th.r);
  return profile_.face[0] * fm;
}

double Assembler::mass_flux_out_with_partials(const Eigen::VectorXd& q, Eigen::VectorXd& dj_dq,
                                              std::span<double> d_xp, std::span<double> d_ap,
                                              bool normalized) const {
  const Thermo last = thermo(q.data() + 3 * (n_ - 1));
  const Ghost gr = outlet_ghost(last);
  const double fm = 0.5 * (last.m + gr.th.m) - 0.5 * a_glob_ * (gr.th.r - last.r);
  const double af = profile_.face[n_];

  // mass row of dFhat/d(q_{n-1}): direct left-state part + ghost chain
  Eigen::RowVector3d row = Eigen::RowVector3d::Zero();
  row(1) += 0.5;              // d/dm of 1/2 m_last
  row(0) += 0.5 * a_glob_;    // d/dr of +1/2 a r_last
  Eigen::RowVector3d ghost_row =
      0.5 * Eigen::RowVector3d{0.0, 1.0, 0.0} - 0.5 * a_glob_ * Eigen::RowVector3d{1.0, 0.0, 0.0};
  row += ghost_row * gr.d_dq;

  dj_dq = Eigen::VectorXd::Zero(3 * n_);
  const double qcoeff = normalized ? 1.0 : af;
  dj_dq.segment<3>(3 * (n_ - 1)) = (qcoeff * row).transpose();

  if (!normalized) {
    const int np = profile_.n_pts;
    for (int p = 0; p < np; ++p) {
      d_xp[p] += fm * profile_.dface_dx[static_cast<std::size_t>(n_) * np + p];
      d_ap[p] += fm * profile_.dface_da[static_cast<std::size_t>(n_) * np + p];
    }
  }
  return normalized ? fm : af * fm;
}

}  // namespace nozzle_internal

namespace {

using nozzle_internal::Assembler;

Eigen::VectorXd initial_guess(const Assembler& assembler, const FlowBc& bc, int n) {
  const double p_nd = bc.p_out / bc.p_total_in;
  const double u0 = 0.1 * std::sqrt(2.0 * std::max(1.0 - p_nd, 1e-3));
  const double U0 = assembler.nd_eos().invert_u(1.0, p_nd, p_nd / 0.4);
  Eigen::VectorXd q(3 * n);
  for (int i = 0; i < n; ++i) {
    q(3 * i) = 1.0;
    q(3 * i + 1) = u0;
    q(3 * i + 2) = U0 + 0.5 * u0 * u0;
  }
  return q;
}

}  // namespace

SteadyResult solve_steady(const StateEquation& eos, const BsplineArea& area, const FlowBc& bc,
                          GridPtr grid, const NozzleConfig& config,
                          const NozzleState* warm_start) {
  if (!grid) throw argument_error("solve_steady: grid required");
  Assembler assembler(eos, area, bc, *grid, config);
  const int n = grid->n_cells();

  Eigen::VectorXd q;
  if (warm_start) {
    if (warm_start->n_cells() != n)
      throw grid_mismatch_error("solve_steady: warm start grid mismatch");
    q = Eigen::Map<const Eigen::VectorXd>(warm_start->raw().data(), 3 * n);
  } else {
    q = initial_guess(assembler, bc, n);
  }

  std::vector<double> history;
  Eigen::VectorXd res;
  try {
    assembler.residual(q, res);
  } catch (const domain_error& e) {
    throw convergence_error(std::string("solve_steady: initial state invalid: ") + e.what(),
                            history);
  }
  double rnorm = res.lpNorm<Eigen::Infinity>();
  history.push_back(rnorm);
  const double r0 = std::max(rnorm, 1e-300);

  double dx_min = grid->x_width(0);
  for (int i = 1; i < n; ++i) dx_min = std::min(dx_min, grid->x_width(i));

  // Pseudo-transient continuation with an adaptive CFL (switched evolution
  // relaxation): bounded residual climbs are allowed mid-transient, rejections
  // shrink the CFL and re-solve with the same Jacobian. A stagnation detector
  // fails fast when no new best residual appears: twin state equations can
  // carry locally non-hyperbolic pockets whose growing modes would otherwise
  // let the iteration orbit until max_steps.
  double cfl = config.cfl0;
  double best = rnorm;
  int best_step = 0;
  int step = 0;
  for (; step < config.max_steps && rnorm > config.steady_tol; ++step) {
    if (step - best_step > 60)
      throw convergence_error("solve_steady: stagnated (no residual progress)", history);

    Eigen::VectorXd r_now;
    nozzle_internal::SpMat jac;
    assembler.residual_and_jacobian(q, r_now, jac);

    bool accepted = false;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      const double inv_dtau = assembler.wave_speed() / (cfl * dx_min);
      nozzle_internal::SpMat m = jac;
      for (int i = 0; i < 3 * n; ++i) m.coeffRef(i, i) += inv_dtau;
      m.makeCompressed();
      Eigen::SparseLU<nozzle_internal::SpMat> lu(m);
      if (lu.info() != Eigen::Success) {
        if (cfl <= 1e-10)
          throw convergence_error("solve_steady: singular steady Jacobian", history);
        cfl *= 0.25;
        continue;
      }
      Eigen::VectorXd q_try = q + lu.solve(-r_now);
      double rn_try = std::numeric_limits<double>::quiet_NaN();
      try {
        assembler.residual(q_try, res);
        rn_try = res.lpNorm<Eigen::Infinity>();
      } catch (const domain_error&) {
      }
      if (std::isfinite(rn_try) && rn_try <= 2.0 * rnorm) {
        q = std::move(q_try);
        cfl = std::min(cfl * std::clamp(rnorm / std::max(rn_try, 1e-300), 0.5, 10.0),
                       config.cfl_max);
        rnorm = rn_try;
        accepted = true;
      } else {
        cfl *= 0.25;
        if (cfl < 1e-12)
          throw convergence_error("solve_steady: step rejected repeatedly", history);
      }
    }
    if (!accepted) throw convergence_error("solve_steady: step rejected repeatedly", history);
    history.push_back(rnorm);
    if (rnorm < 0.98 * best) {
      best = rnorm;
      best_step = step;
    }
  }
  if (rnorm > config.steady_tol)
    throw convergence_error("solve_steady: did not reach steady_tol", history);
  (void)r0;

  NozzleState state(grid, bc);
  Eigen::Map<Eigen::VectorXd>(state.raw().data(), 3 * n) = q;
  return SteadyResult{std::move(state), std::move(history), step};
}

MassFluxPair mass_flux_pair(const NozzleState& state, const StateEquation& eos,
                            const BsplineArea& area, const FlowBc& bc,
                            const NozzleConfig& config) {
  Assembler assembler(eos, area, bc, state.grid(), config);
  const Eigen::Map<const Eigen::VectorXd> q(state.raw().data(),
                                            static_cast<Eigen::Index>(state.raw().size()));
  return {assembler.mass_flux_in(q), assembler.mass_flux_out(q)};
}

double mass_flux(const NozzleState& state, const StateEquation& eos, const BsplineArea& area,
                 const FlowBc& bc, const NozzleConfig& config) {
  return mass_flux_pair(state, eos, area, bc, config).outlet;
}

void write_nozzle_csv(const NozzleState& state, const StateEquation& eos,
                      const BsplineArea& area, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("write_nozzle_csv: cannot open " + path);
  out << "x,area,rho,u,E,p\n";
  char buf[192];
  for (int i = 0; i < state.n_cells(); ++i) {
    const double x = state.grid().x_center(i);
    const auto [rho_dim, u_dim] = state.state_point(i);
    const double p_nd = eos.pressure(rho_dim, u_dim) / state.p_scale();
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x, area.area_at(x),
                  state.rho(i), state.velocity(i), state.energy(i) / state.rho(i), p_nd);
    out << buf;
  }
}

NozzleSolutionData read_nozzle_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("read_nozzle_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,area,rho,u,E,p", 0) != 0)
    throw io_error("read_nozzle_csv: missing header in " + path);
  NozzleSolutionData d;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x, a, r, u, e, p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &x, &a, &r, &u, &e, &p) != 6)
      throw io_error("read_nozzle_csv: malformed row '" + line + "'");
    d.x.push_back(x);
    d.area.push_back(a);
    d.rho.push_back(r);
    d.u.push_back(u);
    d.E.push_back(e);
    d.p.push_back(p);
  }
  if (d.x.empty()) throw io_error("read_nozzle_csv: no data rows in " + path);
  return d;
}

}  // namespace twin
