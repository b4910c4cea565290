#pragma once

#include <memory>
#include <vector>

namespace twin {

/// 1-D cell-centered grid with an optional time axis.
///
/// The spatial axis is a set of cells with centers x_i and widths dx_i whose
/// widths sum to the domain length. The time axis is a set of sample times
/// t_k, each carrying a quadrature weight w_k; the weights sum to the horizon
/// T = t_last - t_first. For uniform grids every sample gets the same weight
/// T/N_t, while the solver step sizes are the consecutive differences of the
/// sample times. Grids are immutable after construction and safe to share
/// across threads.
class Grid1D {
 public:
  /// Uniform space-time grid on [0,length] x [0,horizon] with n_time sample
  /// rows (row 0 at t=0) and equal time quadrature weights horizon/n_time.
  static Grid1D uniform(int n_cells, int n_time, double length, double horizon,
                        bool periodic = true);

  /// Spatial-only grid (steady problems); the time axis is empty.
  static Grid1D spatial(int n_cells, double length, bool periodic = false);

  /// General constructor; validates ascending centers/times, positive widths
  /// and weights.
  Grid1D(std::vector<double> x_centers, std::vector<double> x_widths,
         std::vector<double> t_points, std::vector<double> t_weights,
         bool periodic);

  int n_cells() const { return static_cast<int>(x_centers_.size()); }
  int n_time() const { return static_cast<int>(t_points_.size()); }
  bool periodic() const { return periodic_; }

  double x_center(int i) const { return x_centers_[i]; }
  double x_width(int i) const { return x_widths_[i]; }
  double t_point(int k) const { return t_points_[k]; }
  double t_weight(int k) const { return t_weights_[k]; }
  /// Step size between sample rows k and k+1.
  double t_step(int k) const { return t_points_[k + 1] - t_points_[k]; }

  double length() const { return length_; }
  double horizon() const { return horizon_; }

  const std::vector<double>& x_centers() const { return x_centers_; }
  const std::vector<double>& x_widths() const { return x_widths_; }
  const std::vector<double>& t_points() const { return t_points_; }
  const std::vector<double>& t_weights() const { return t_weights_; }

  /// True when the two grids have identical layout (same arrays).
  bool same_layout(const Grid1D& other) const;

 private:
  std::vector<double> x_centers_;
  std::vector<double> x_widths_;
  std::vector<double> t_points_;
  std::vector<double> t_weights_;
  double length_ = 0.0;
  double horizon_ = 0.0;
  bool periodic_ = false;
};

using GridPtr = std::shared_ptr<const Grid1D>;

inline GridPtr make_grid(Grid1D g) { return std::make_shared<const Grid1D>(std::move(g)); }

}  // namespace twin
