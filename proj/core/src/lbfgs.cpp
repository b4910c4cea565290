#include "twinmodel/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "twinmodel/errors.hpp"

namespace twin {

namespace {

void clamp_into(std::span<const double> lower, std::span<const double> upper,
                std::vector<double>& x) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::min(std::max(x[i], lower[i]), upper[i]);
}

// stationarity measure ||x - P(x - g)||_inf (bound distance caps the raw
// gradient for variables pinned against their bound)
double projected_grad_inf(const std::vector<double>& x, const std::vector<double>& g,
                          std::span<const double> lower, std::span<const double> upper) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double stepped = std::min(std::max(x[i] - g[i], lower[i]), upper[i]);
    m = std::max(m, std::abs(x[i] - stepped));
  }
  return m;
}

struct PathPoint {
  std::vector<double> x;
  std::vector<double> g;
  double f = 0.0;
  double dphi = 0.0;  // slope of f along the projected path at this point
  double alpha = 0.0;
  bool ok = false;
};

}  // namespace

LbfgsResult minimize_bounded(const BoundObjective& objective, std::vector<double> x0,
                             std::span<const double> lower, std::span<const double> upper,
                             const LbfgsOptions& options, const LbfgsCallback& callback) {
  const std::size_t n = x0.size();
  if (lower.size() != n || upper.size() != n)
    throw argument_error("minimize_bounded: bound sizes must match x0");
  for (std::size_t i = 0; i < n; ++i)
    if (!(lower[i] <= upper[i])) throw argument_error("minimize_bounded: inconsistent bounds");

  LbfgsResult result;
  std::vector<double> x = std::move(x0);
  clamp_into(lower, upper, x);
  std::vector<double> g(n);
  double f = 0.0;
  if (!objective(x, f, g))
    throw argument_error("minimize_bounded: objective evaluation failed at the start");

  auto eval_path = [&](const std::vector<double>& dir, double alpha) {
    PathPoint p;
    p.alpha = alpha;
    p.x.resize(n);
    p.g.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      p.x[i] = std::min(std::max(x[i] + alpha * dir[i], lower[i]), upper[i]);
    p.ok = objective(p.x, p.f, p.g);
    if (p.ok) {
      p.dphi = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool pinned = (p.x[i] <= lower[i] && dir[i] < 0.0) ||
                            (p.x[i] >= upper[i] && dir[i] > 0.0);
        if (!pinned) p.dphi += p.g[i] * dir[i];
      }
    }
    return p;
  };

  // variables pressed against a bound by the gradient are frozen out of the
  // quasi-Newton subspace (their curvature pairs would poison the direction)
  auto active_mask = [&](std::vector<bool>& active) {
    for (std::size_t i = 0; i < n; ++i) {
      const double eps = 1e-12 * std::max(1.0, std::abs(x[i]));
      active[i] = (x[i] - lower[i] <= eps && g[i] > 0.0) ||
                  (upper[i] - x[i] <= eps && g[i] < 0.0);
    }
  };

  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)

  auto push_trace = [&](int iter, double fval, double pg, double step) {
    result.trace.push_back({iter, fval, pg, step});
    if (callback) callback(result.trace.back(), x);
  };

  double pg = projected_grad_inf(x, g, lower, upper);
  push_trace(0, f, pg, 0.0);

  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    if (pg <= options.grad_tol) {
      result.status = LbfgsStatus::converged;
      break;
    }

    std::vector<bool> active(n);
    active_mask(active);

    // two-loop recursion on the masked gradient; frozen components stay zero
    auto build_direction = [&](bool use_memory) {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) d[i] = active[i] ? 0.0 : -g[i];
      if (!use_memory || pairs.empty()) return d;
      std::vector<double> alpha_hist(pairs.size());
      for (int j = static_cast<int>(pairs.size()) - 1; j >= 0; --j) {
        const auto& [s, y] = pairs[j];
        double sy = 0.0, sd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          sy += s[i] * y[i];
          sd += s[i] * d[i];
        }
        alpha_hist[j] = sd / sy;
        for (std::size_t i = 0; i < n; ++i) d[i] -= alpha_hist[j] * y[i];
      }
      {
        const auto& [s, y] = pairs.back();
        double sy = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          sy += s[i] * y[i];
          yy += y[i] * y[i];
        }
        const double gamma = sy / yy;
        for (std::size_t i = 0; i < n; ++i) d[i] *= gamma;
      }
      for (int j = 0; j < static_cast<int>(pairs.size()); ++j) {
        const auto& [s, y] = pairs[j];
        double sy = 0.0, yd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          sy += s[i] * y[i];
          yd += y[i] * d[i];
        }
        const double beta = yd / sy;
        for (std::size_t i = 0; i < n; ++i) d[i] += (alpha_hist[j] - beta) * s[i];
      }
      for (std::size_t i = 0; i < n; ++i)
        if (active[i]) d[i] = 0.0;
      return d;
    };

    auto slope_at_x = [&](const std::vector<double>& d) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool pinned = (x[i] <= lower[i] && d[i] < 0.0) ||
                            (x[i] >= upper[i] && d[i] > 0.0);
        if (!pinned) s += g[i] * d[i];
      }
      return s;
    };

    // Armijo backtracking on the projected arc (sufficient decrease measured
    // against the actual step), then a curvature expansion toward the Wolfe
    // condition when cheaply available.
    const double c1 = options.wolfe_c1, c2 = options.wolfe_c2;
    int evals = 0;
    PathPoint accepted;
    accepted.ok = false;

    auto line_search = [&](const std::vector<double>& d, double dphi0) {
      PathPoint got;
      got.ok = false;
      double alpha = 1.0;
      while (evals < options.max_line_search) {
        PathPoint p = eval_path(d, alpha);
        ++evals;
        if (p.ok) {
          double lin = 0.0;
          for (std::size_t i = 0; i < n; ++i) lin += g[i] * (p.x[i] - x[i]);
          if (p.f < f && p.f <= f + c1 * std::min(lin, 0.0)) {
            got = p;
            break;
          }
        }
        alpha *= 0.5;
        if (alpha < 1e-20) break;
      }
      if (!got.ok) return got;
      // expand while the slope is still clearly downhill and the larger step
      // keeps improving (builds better curvature pairs)
      while (evals < options.max_line_search && got.dphi < 0.0 &&
             std::abs(got.dphi) > -c2 * dphi0) {
        PathPoint p = eval_path(d, 2.0 * got.alpha);
        ++evals;
        if (!p.ok || !(p.f < got.f)) break;
        double lin = 0.0;
        for (std::size_t i = 0; i < n; ++i) lin += g[i] * (p.x[i] - x[i]);
        if (!(p.f <= f + c1 * std::min(lin, 0.0))) break;
        got = p;
      }
      return got;
    };

    std::vector<double> d = build_direction(true);
    double dphi0 = slope_at_x(d);
    if (dphi0 < 0.0) accepted = line_search(d, dphi0);
    if (!accepted.ok) {
      // quasi-Newton direction failed; restart from masked steepest descent
      pairs.clear();
      d = build_direction(false);
      dphi0 = slope_at_x(d);
      if (dphi0 < 0.0) accepted = line_search(d, dphi0);
    }
    if (!accepted.ok || !(accepted.f < f)) {
      result.status = LbfgsStatus::line_search_failed;
      break;
    }

    std::vector<double> s(n), y(n);
    double sy = 0.0, ss = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = accepted.x[i] - x[i];
      y[i] = accepted.g[i] - g[i];
      sy += s[i] * y[i];
      ss += s[i] * s[i];
      yy += y[i] * y[i];
    }
    if (sy > 1e-10 * std::sqrt(ss * yy)) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(pairs.size()) > options.memory) pairs.pop_front();
    }

    x = std::move(accepted.x);
    g = std::move(accepted.g);
    f = accepted.f;
    pg = projected_grad_inf(x, g, lower, upper);
    push_trace(iter + 1, f, pg, accepted.alpha);
  }

  if (iter == options.max_iters) result.status = LbfgsStatus::max_iterations;
  if (pg <= options.grad_tol) result.status = LbfgsStatus::converged;
  result.x = std::move(x);
  result.f = f;
  result.iterations = iter;
  return result;
}

}  // namespace twin
