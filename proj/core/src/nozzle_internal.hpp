// Internal quasi-1D Euler assembly shared by the steady solver and the
// steady adjoint. Not installed; Eigen types allowed here.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>
#include <vector>

#include "twinmodel/bspline.hpp"
#include "twinmodel/eos.hpp"
#include "twinmodel/grid.hpp"
#include "twinmodel/nozzle.hpp"

namespace twin::nozzle_internal {

using SpMat = Eigen::SparseMatrix<double>;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Nondimensional view of a state equation: densities scaled by rho_s,
/// pressures and energies per volume by p_s.
struct NdEos {
  const StateEquation* eos = nullptr;
  double rho_s = 1.0;
  double p_s = 1.0;

  EosEval eval(double r, double U) const {
    EosEval e = eos->evaluate(r * rho_s, U * p_s);
    return {e.p / p_s, e.dp_drho * rho_s / p_s, e.dp_dU};
  }
  void param_derivs(double r, double U, std::span<double> out) const {
    eos->param_derivs(r * rho_s, U * p_s, out);
    for (double& v : out) v /= p_s;
  }
  double invert_u(double r, double p_target, double u_guess) const {
    return invert_internal_energy(*eos, r * rho_s, p_target * p_s, u_guess * p_s) / p_s;
  }
};

/// Per-location thermodynamic bundle (nondimensional).
struct Thermo {
  double r, m, e;    // conservative
  double u, U, p;    // derived
  double p_r, p_U;   // EOS partials
};

/// Face/cell areas on the grid with their control-point Jacobians
/// (row-major location x point, separate for x- and A-coordinates).
struct AreaProfile {
  int n_pts = 0;
  std::vector<double> face;     // size n+1
  std::vector<double> cell;     // size n
  std::vector<double> dface_dx, dface_da;  // (n+1) x n_pts
  std::vector<double> dcell_dx, dcell_da;  // n x n_pts
};

AreaProfile build_area_profile(const BsplineArea& spline, const Grid1D& grid);

/// Assembles the steady residual, its Jacobian, and the adjoint
/// vector-Jacobian products for one (eos, geometry, bc) configuration.
class Assembler {
 public:
  Assembler(const StateEquation& eos, const BsplineArea& spline, const FlowBc& bc,
            const Grid1D& grid, const NozzleConfig& config);

  int n() const { return n_; }
  double wave_speed() const { return a_glob_; }
  const AreaProfile& profile() const { return profile_; }
  const NdEos& nd_eos() const { return nd_; }
  double p_out_nd() const { return p_out_nd_; }
  double p_total_nd() const { return 1.0; }

  Thermo thermo(const double* q) const;
  /// Ghost state and its 3x3 Jacobian w.r.t. the adjacent interior cell plus
  /// the energy sensitivity to the EOS parameters.
  struct Ghost {
    Vec3 q;
    Mat3 d_dq;       // d ghost / d adjacent interior conservative state
    Thermo th;       // thermo at the ghost state
    double du_dalpha_factor;  // dU_ghost/dalpha = factor * p_alpha(ghost)
  };
  Ghost inlet_ghost(const Thermo& first) const;
  Ghost outlet_ghost(const Thermo& last) const;

  void residual(const Eigen::VectorXd& q, Eigen::VectorXd& r) const;
  void residual_and_jacobian(const Eigen::VectorXd& q, Eigen::VectorXd& r, SpMat& jac) const;

  /// psi^T dR/d(eos params), size num_params.
  Eigen::VectorXd eos_param_vjp(const Eigen::VectorXd& q, const Eigen::VectorXd& psi) const;
  /// Adds psi^T dR/d(x_p, A_p) into the output spans (size num control pts each).
  void geometry_vjp(const Eigen::VectorXd& q, const Eigen::VectorXd& psi,
                    std::span<double> d_xp, std::span<double> d_ap) const;

  double mass_flux_out(const Eigen::VectorXd& q) const;
  double mass_flux_in(const Eigen::VectorXd& q) const;
  /// J = outlet mass flux (optionally normalized by the outlet face area);
  /// fills dJ/dq (dense, only the last cell block is nonzero) and the
  /// explicit geometry partials.
  double mass_flux_out_with_partials(const Eigen::VectorXd& q, Eigen::VectorXd& dj_dq,
                                     std::span<double> d_xp, std::span<double> d_ap,
                                     bool normalized) const;

 private:
  Vec3 euler_flux(const Thermo& t) const;
  Mat3 flux_jacobian(const Thermo& t) const;

  const StateEquation* eos_;
  const BsplineArea* spline_;
  FlowBc bc_;
  const Grid1D* grid_;
  NozzleConfig config_;
  NdEos nd_;
  AreaProfile profile_;
  int n_ = 0;
  double p_out_nd_ = 0.0;
  double a_glob_ = 0.0;
  double p_floor_ = 0.0;
};

}  // namespace twin::nozzle_internal
