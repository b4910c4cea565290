#pragma once

#include <span>
#include <string>
#include <vector>

#include "twinmodel/grid.hpp"

namespace twin {

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Discretized space-time solution u(t_k, x_i) stored dense row-major by time
/// then space. Immutable grid reference; values validated finite on demand.
class SpaceTimeField {
 public:
  SpaceTimeField(GridPtr grid, std::vector<double> values);
  /// Zero-initialized field on the grid.
  explicit SpaceTimeField(GridPtr grid);

  const Grid1D& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }

  double at(int k, int i) const { return values_[index(k, i)]; }
  double& at(int k, int i) { return values_[index(k, i)]; }
  std::span<const double> row(int k) const;
  std::span<double> row(int k);

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const;

 private:
  int index(int k, int i) const { return k * grid_->n_cells() + i; }
  GridPtr grid_;
  std::vector<double> values_;
};

/// Per-cell values of one conserved quantity on a Grid1D (no time axis).
class SteadyField {
 public:
  SteadyField(GridPtr grid, std::vector<double> values);
  explicit SteadyField(GridPtr grid);

  const Grid1D& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  double at(int i) const { return values_[i]; }
  double& at(int i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Space-time mismatch (1/T) * sum_{k,i} (a_{ki} - b_{ki})^2 * w_k * dx_i.
/// Requires identical grid layouts; summation order is fixed (ascending k,
/// then i) so results are bit-reproducible.
double mismatch_spacetime(const SpaceTimeField& a, const SpaceTimeField& b);

/// Weighted steady mismatch sum_q w_q * ||twin_q - gray_q||^2 with the
/// cell-width-weighted discrete L2 norm. All weights must be positive.
double mismatch_steady_weighted(std::span<const SteadyField> twin,
                                std::span<const SteadyField> gray,
                                std::span<const double> weights);

/// Global [min, max] of the field values (the excited range of the data).
Interval excited_range(const SpaceTimeField& u);

/// CSV serialization: header `t,x,value`, one row per (k, i), ascending k
/// then i, full round-trip precision.
void write_field_csv(const SpaceTimeField& field, const std::string& path);

/// Reads the `t,x,value` format back, inferring a uniform periodic grid from
/// the unique time/space coordinates.
SpaceTimeField read_field_csv(const std::string& path);

}  // namespace twin
