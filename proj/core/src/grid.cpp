#include "twinmodel/grid.hpp"

#include <cmath>
#include <numeric>

#include "twinmodel/errors.hpp"

namespace twin {

namespace {

void check_ascending(const std::vector<double>& v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw argument_error(std::string(what) + " must be strictly ascending");
  }
}

void check_positive(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!(x > 0.0)) throw argument_error(std::string(what) + " must be strictly positive");
  }
}

}  // namespace

Grid1D::Grid1D(std::vector<double> x_centers, std::vector<double> x_widths,
               std::vector<double> t_points, std::vector<double> t_weights, bool periodic)
    : x_centers_(std::move(x_centers)),
      x_widths_(std::move(x_widths)),
      t_points_(std::move(t_points)),
      t_weights_(std::move(t_weights)),
      periodic_(periodic) {
  if (x_centers_.empty()) throw argument_error("Grid1D: at least one cell required");
  if (x_centers_.size() != x_widths_.size())
    throw argument_error("Grid1D: centers/widths size mismatch");
  if (t_points_.size() != t_weights_.size())
    throw argument_error("Grid1D: time points/weights size mismatch");
  check_ascending(x_centers_, "cell centers");
  check_positive(x_widths_, "cell widths");
  check_ascending(t_points_, "time points");
  check_positive(t_weights_, "time weights");

  length_ = std::accumulate(x_widths_.begin(), x_widths_.end(), 0.0);
  if (!t_points_.empty()) {
    horizon_ = t_points_.back() - t_points_.front();
    double wsum = std::accumulate(t_weights_.begin(), t_weights_.end(), 0.0);
    if (t_points_.size() > 1 &&
        std::abs(wsum - horizon_) > 1e-9 * std::max(1.0, std::abs(horizon_)))
      throw argument_error("Grid1D: time weights must sum to the horizon");
  }
}

Grid1D Grid1D::uniform(int n_cells, int n_time, double length, double horizon, bool periodic) {
  if (n_cells < 1 || n_time < 2) throw argument_error("Grid1D::uniform: need n_cells>=1, n_time>=2");
  if (!(length > 0.0) || !(horizon > 0.0))
    throw argument_error("Grid1D::uniform: length and horizon must be positive");
  const double dx = length / n_cells;
  const double dt = horizon / (n_time - 1);
  std::vector<double> xc(n_cells), xw(n_cells, dx), tp(n_time), tw(n_time, horizon / n_time);
  for (int i = 0; i < n_cells; ++i) xc[i] = (i + 0.5) * dx;
  for (int k = 0; k < n_time; ++k) tp[k] = k * dt;
  tp.back() = horizon;
  return Grid1D(std::move(xc), std::move(xw), std::move(tp), std::move(tw), periodic);
}

Grid1D Grid1D::spatial(int n_cells, double length, bool periodic) {
  if (n_cells < 1) throw argument_error("Grid1D::spatial: need n_cells>=1");
  if (!(length > 0.0)) throw argument_error("Grid1D::spatial: length must be positive");
  const double dx = length / n_cells;
  std::vector<double> xc(n_cells), xw(n_cells, dx);
  for (int i = 0; i < n_cells; ++i) xc[i] = (i + 0.5) * dx;
  return Grid1D(std::move(xc), std::move(xw), {}, {}, periodic);
}

bool Grid1D::same_layout(const Grid1D& other) const {
  return x_centers_ == other.x_centers_ && x_widths_ == other.x_widths_ &&
         t_points_ == other.t_points_ && t_weights_ == other.t_weights_ &&
         periodic_ == other.periodic_;
}

}  // namespace twin
