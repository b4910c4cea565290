#pragma once

#include <functional>
#include <span>
#include <vector>

namespace twin {

struct LbfgsOptions {
  int memory = 10;
  int max_iters = 300;
  double grad_tol = 1e-8;  ///< termination on projected-gradient L-inf
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 30;
};

enum class LbfgsStatus {
  converged,
  max_iterations,
  line_search_failed,  ///< best-so-far point returned
};

struct LbfgsTraceEntry {
  int iter = 0;
  double f = 0.0;
  double proj_grad_inf = 0.0;
  double step = 0.0;
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  LbfgsStatus status = LbfgsStatus::max_iterations;
  int iterations = 0;
  std::vector<LbfgsTraceEntry> trace;
};

/// Objective callback: fills `grad`, returns false when the evaluation failed
/// (e.g. the forward solve diverged); failures are treated as line-search
/// step rejections.
using BoundObjective =
    std::function<bool(std::span<const double> x, double& f, std::span<double> grad)>;

/// Called after every accepted step with the new iterate.
using LbfgsCallback = std::function<void(const LbfgsTraceEntry&, std::span<const double> x)>;

/// Box-constrained limited-memory BFGS: two-loop recursion, strong-Wolfe line
/// search on the feasible path (projection onto the bounds after each trial
/// step), accepted steps are monotone non-increasing in f. Terminates when
/// the projected gradient L-inf drops below grad_tol.
LbfgsResult minimize_bounded(const BoundObjective& objective, std::vector<double> x0,
                             std::span<const double> lower, std::span<const double> upper,
                             const LbfgsOptions& options, const LbfgsCallback& callback = {});

}  // namespace twin
