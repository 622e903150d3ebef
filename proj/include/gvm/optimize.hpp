#pragma once

// Derivative-free minimizers over R^d. Non-finite objective values are read as +inf.

#include <functional>
#include <span>
#include <vector>

namespace gvm {

using Objective = std::function<double(std::span<const double>)>;

struct OptimizeOptions {
  int max_iters = 2000;
  int max_evals = 20000;
  /// Stop when the best value improves by less than tolerance * (|f| + tolerance) over an iteration.
  double tolerance = 1e-10;
  /// Initial simplex edge / Powell direction length.
  double initial_step = 0.1;
  /// Nelder-Mead restarts from the best point after convergence.
  int restarts = 2;
};

struct OptimizeResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  /// Best value seen so far, one entry per iteration (non-increasing).
  std::vector<double> history;
};

OptimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const OptimizeOptions& opt = {});
OptimizeResult powell(const Objective& f, std::vector<double> x0, const OptimizeOptions& opt = {});

}  // namespace gvm
