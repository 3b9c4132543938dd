#include <cmath>

#include "selfsim/samplers.hpp"

namespace selfsim {

Eigen::VectorXd BrownianSampler::draw(RngStream& rng) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXd path(n);
  double level = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    level += sd * rng.gaussian();
    path(k) = level;
  }
  return path;
}

SamplePath sample_bm(const GridSpec& grid, RngStream& rng) { return make_path(BrownianSampler(grid), rng); }

}  // namespace selfsim
