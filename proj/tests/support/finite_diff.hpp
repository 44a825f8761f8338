#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "fedsim/param_vector.hpp"

namespace fedsim::testing {

// Central-difference check of an analytic gradient. Returns the worst
// per-coordinate error, scaled so it is relative for large derivatives and
// absolute for tiny ones.
template <typename Loss>
double max_gradient_error(Loss&& loss, const ParamVector& at, const ParamVector& grad,
                          double step = 1e-6) {
  ParamVector probe = at;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + step;
    const double up = loss(probe);
    probe[i] = saved - step;
    const double down = loss(probe);
    probe[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    const double g = grad[i];
    const double scale = std::max({1.0, std::fabs(fd), std::fabs(g)});
    worst = std::max(worst, std::fabs(fd - g) / scale);
  }
  return worst;
}

}  // namespace fedsim::testing
