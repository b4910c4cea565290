#include "twinmodel/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "twinmodel/errors.hpp"

namespace twin {

SpaceTimeField::SpaceTimeField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_ || grid_->n_time() < 1) throw argument_error("SpaceTimeField: grid with time axis required");
  if (static_cast<int>(values_.size()) != grid_->n_time() * grid_->n_cells())
    throw grid_mismatch_error("SpaceTimeField: value count does not match grid shape");
}

SpaceTimeField::SpaceTimeField(GridPtr grid)
    : SpaceTimeField(grid, std::vector<double>(
                               grid ? static_cast<std::size_t>(grid->n_time()) * grid->n_cells() : 0,
                               0.0)) {}

std::span<const double> SpaceTimeField::row(int k) const {
  return {values_.data() + static_cast<std::size_t>(k) * grid_->n_cells(),
          static_cast<std::size_t>(grid_->n_cells())};
}

std::span<double> SpaceTimeField::row(int k) {
  return {values_.data() + static_cast<std::size_t>(k) * grid_->n_cells(),
          static_cast<std::size_t>(grid_->n_cells())};
}

bool SpaceTimeField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

SteadyField::SteadyField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw argument_error("SteadyField: grid required");
  if (static_cast<int>(values_.size()) != grid_->n_cells())
    throw grid_mismatch_error("SteadyField: value count does not match grid");
}

SteadyField::SteadyField(GridPtr grid)
    : SteadyField(grid, std::vector<double>(grid ? grid->n_cells() : 0, 0.0)) {}

double mismatch_spacetime(const SpaceTimeField& a, const SpaceTimeField& b) {
  const Grid1D& g = a.grid();
  if (&g != &b.grid() && !g.same_layout(b.grid()))
    throw grid_mismatch_error("mismatch_spacetime: fields live on different grids");
  double sum = 0.0;
  for (int k = 0; k < g.n_time(); ++k) {
    const double wk = g.t_weight(k);
    double row_sum = 0.0;
    for (int i = 0; i < g.n_cells(); ++i) {
      const double d = a.at(k, i) - b.at(k, i);
      row_sum += d * d * g.x_width(i);
    }
    sum += wk * row_sum;
  }
  return sum / g.horizon();
}

double mismatch_steady_weighted(std::span<const SteadyField> twin,
                                std::span<const SteadyField> gray,
                                std::span<const double> weights) {
  if (twin.size() != gray.size() || twin.size() != weights.size())
    throw argument_error("mismatch_steady_weighted: list sizes must match");
  for (double w : weights)
    if (!(w > 0.0)) throw argument_error("mismatch_steady_weighted: weights must be positive");
  double sum = 0.0;
  for (std::size_t q = 0; q < twin.size(); ++q) {
    const Grid1D& g = twin[q].grid();
    if (&g != &gray[q].grid() && !g.same_layout(gray[q].grid()))
      throw grid_mismatch_error("mismatch_steady_weighted: grid mismatch in field pair");
    double norm2 = 0.0;
    for (int i = 0; i < g.n_cells(); ++i) {
      const double d = twin[q].at(i) - gray[q].at(i);
      norm2 += d * d * g.x_width(i);
    }
    sum += weights[q] * norm2;
  }
  return sum;
}

Interval excited_range(const SpaceTimeField& u) {
  if (u.values().empty()) throw argument_error("excited_range: empty field");
  auto [lo, hi] = std::minmax_element(u.values().begin(), u.values().end());
  return {*lo, *hi};
}

void write_field_csv(const SpaceTimeField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("write_field_csv: cannot open " + path);
  out << "t,x,value\n";
  const Grid1D& g = field.grid();
  char buf[96];
  for (int k = 0; k < g.n_time(); ++k) {
    for (int i = 0; i < g.n_cells(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g.t_point(k), g.x_center(i),
                    field.at(k, i));
      out << buf;
    }
  }
  if (!out) throw io_error("write_field_csv: write failed for " + path);
}

SpaceTimeField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("read_field_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,x,value", 0) != 0)
    throw io_error("read_field_csv: missing t,x,value header in " + path);

  std::vector<double> ts, xs, vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t, x, v;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &x, &v) != 3)
      throw io_error("read_field_csv: malformed row '" + line + "'");
    ts.push_back(t);
    xs.push_back(x);
    vals.push_back(v);
  }
  if (vals.empty()) throw io_error("read_field_csv: no data rows in " + path);

  // Rows are ascending k then i: the first time block defines the x axis.
  std::size_t n_cells = 1;
  while (n_cells < xs.size() && xs[n_cells] > xs[n_cells - 1]) ++n_cells;
  if (vals.size() % n_cells != 0)
    throw io_error("read_field_csv: row count is not a multiple of the cell count");
  const std::size_t n_time = vals.size() / n_cells;
  if (n_time < 1) throw io_error("read_field_csv: no time rows");

  std::vector<double> xc(xs.begin(), xs.begin() + n_cells);
  std::vector<double> tp(n_time);
  for (std::size_t k = 0; k < n_time; ++k) tp[k] = ts[k * n_cells];

  const double dx = n_cells > 1 ? xc[1] - xc[0] : 2.0 * xc[0];
  std::vector<double> xw(n_cells, dx);
  const double horizon = tp.back() - tp.front();
  if (!(horizon > 0.0)) throw io_error("read_field_csv: non-positive time horizon");
  std::vector<double> tw(n_time, horizon / static_cast<double>(n_time));

  auto grid = make_grid(Grid1D(std::move(xc), std::move(xw), std::move(tp), std::move(tw), true));
  return SpaceTimeField(grid, std::move(vals));
}

}  // namespace twin
