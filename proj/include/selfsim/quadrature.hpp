#pragma once

#include <cstddef>
#include <functional>

namespace selfsim {

struct QuadratureOptions {
  double relative_tolerance = 1e-12;
  double absolute_tolerance = 1e-14;
  std::size_t max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval.
/// Nodes never touch the endpoints, so integrable endpoint singularities are
/// fine. Throws QuadratureError when the interval budget runs out.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& options = {});

}  // namespace selfsim
