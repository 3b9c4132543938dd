#include <cmath>
#include <optional>

#include "selfsim/samplers.hpp"

namespace selfsim {

namespace {

// Returns the failing pivot, or nullopt on success.
std::optional<std::size_t> factor_in_place(const Eigen::MatrixXd& a, double shift, CholeskyFactor::Matrix& l) {
  const Eigen::Index n = a.rows();
  l.setZero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      double s = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      if (i == j) {
        s += shift;
        if (!(s > 0.0) || !std::isfinite(s)) return static_cast<std::size_t>(i);
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

CholeskyFactor cholesky_factor(const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) throw UsageError("Gram matrix must be square and nonempty");
  if (!gram.allFinite()) throw UsageError("Gram matrix has non-finite entries");
  const double scale = gram.cwiseAbs().maxCoeff();
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw UsageError("Gram matrix is not symmetric");

  const double max_diag = gram.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) throw NotPositiveDefinite(0, 0.0);

  CholeskyFactor::Matrix lower;
  std::size_t pivot = 0;
  double jitter = 0.0;
  for (double step : kCholeskyJitterLadder) {
    jitter = step * max_diag;
    const auto failed = factor_in_place(gram, jitter, lower);
    if (!failed) return CholeskyFactor(std::move(lower), jitter);
    pivot = *failed;
  }
  throw NotPositiveDefinite(pivot, jitter);
}

CholeskySampler::CholeskySampler(const CovarianceKernel<double>& kernel, GridSpec grid)
    : kernel_(kernel), grid_(grid), factor_(cholesky_factor(kernel.gram(grid))) {}

Eigen::VectorXd CholeskySampler::draw(RngStream& rng) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(grid_.size()));
  rng.fill_gaussian(z);
  return factor_.apply(z);
}

SamplerInfo CholeskySampler::info() const {
  SamplerInfo info{grid_, Method::cholesky, kernel_.process(), kernel_.hurst()};
  info.diagnostics.jitter = factor_.jitter();
  return info;
}

SamplePath cholesky_sample(const CovarianceKernel<double>& kernel, const GridSpec& grid, RngStream& rng) {
  return make_path(CholeskySampler(kernel, grid), rng);
}

}  // namespace selfsim
