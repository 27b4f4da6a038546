#pragma once

#include <functional>

namespace cgm {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;  ///< |Kronrod - Gauss| summed over the final partition
  int intervals = 0;
  bool converged = false;
};

/// Globally adaptive Gauss-Kronrod (7/15) on a finite [a, b]. Bisects the interval
/// with the largest error estimate until the total estimate is below abs_tol.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-12, int max_intervals = 2000);

}  // namespace cgm
