#pragma once

#include <functional>

#include "igeom/quadrature.hpp"

namespace igeom {

struct SupSearchOptions {
  /// Search box half-width in reference standard deviations.
  double box_sigmas = 8.0;
  /// Grid points per axis; 0 picks a dimension-dependent default.
  int grid_points = 0;
  /// Number of grid local maxima refined by Nelder–Mead.
  int refine_starts = 6;
  double x_tol = 1e-11;
  int max_iterations = 20000;
};

struct SupResult {
  double value = 0.0;
  Eigen::VectorXd argmax;
  /// False when the refinement stagnated; `value` is then the best found.
  bool converged = true;
};

/// max_x |f(x)| over the reference box, by coarse grid scan then local refinement.
SupResult sup_abs(const std::function<double(const Eigen::VectorXd&)>& f,
                  const GaussianReference& frame, const SupSearchOptions& options = {});

struct MinimizeResult {
  Eigen::VectorXd x;
  double value;
  int iterations;
  bool converged;
};

/// Nelder–Mead simplex minimization from x0 with initial edge `step`.
MinimizeResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& x0, double step, double x_tol,
                           int max_iterations);

}  // namespace igeom
