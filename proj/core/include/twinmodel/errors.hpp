#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace twin {

/// Base class for all twinmodel errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Two fields/grids that must share a layout do not.
class grid_mismatch_error : public error {
 public:
  using error::error;
};

/// Invalid argument value (non-positive weight, bad bounds, ...).
class argument_error : public error {
 public:
  using error::error;
};

/// Input outside a model's validity region (b*rho >= 1, U <= 0, ...).
class domain_error : public error {
 public:
  using error::error;
};

/// Degenerate data range where a spread is required.
class degenerate_range_error : public error {
 public:
  using error::error;
};

/// An implicit time step failed to converge; carries the Newton residual trace.
class step_error : public error {
 public:
  step_error(const std::string& what, int time_index, std::vector<double> residuals)
      : error(what), time_index(time_index), residual_trace(std::move(residuals)) {}
  int time_index;
  std::vector<double> residual_trace;
};

/// A steady solve failed; carries the residual history.
class convergence_error : public error {
 public:
  convergence_error(const std::string& what, std::vector<double> residuals)
      : error(what), residual_history(std::move(residuals)) {}
  std::vector<double> residual_history;
};

/// A run record is missing state needed for a reverse sweep.
class state_error : public error {
 public:
  using error::error;
};

/// Weight calibration could not produce usable averages.
class calibration_error : public error {
 public:
  using error::error;
};

/// Experiment configuration failed validation.
class config_error : public error {
 public:
  using error::error;
};

/// File or artifact I/O problem.
class io_error : public error {
 public:
  using error::error;
};

}  // namespace twin
