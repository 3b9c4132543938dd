#include <cmath>

#include "selfsim/samplers.hpp"

namespace selfsim {

namespace {

// ((1 + x)^a - x^a)^2 on x in (0, 1], after x = y^{1/H} when a < 0 to absorb
// the x^{2a} endpoint singularity.
double head_integrand(double y, double a, double hurst) {
  if (a < 0.0) {
    const double s = 1.0 / hurst;
    const double x = std::pow(y, s);
    if (x == 0.0) return 0.0;
    const double d = std::pow(x, a) * std::expm1(a * std::log1p(1.0 / x));
    return d * d * s * std::pow(y, s - 1.0);
  }
  if (y == 0.0) return 1.0;
  const double d = std::pow(y, a) * std::expm1(a * std::log1p(1.0 / y));
  return d * d;
}

// Tail x in [1, inf) mapped by x = 1/y, then y = w^{1/(1-H)} when a > 0 to
// absorb the y^{-2a} singularity at y = 0.
double tail_integrand(double w, double a, double hurst) {
  auto g = [a](double y) {
    const double d = std::pow(y, -a - 1.0) * std::expm1(a * std::log1p(y));
    return d * d;
  };
  if (a > 0.0) {
    const double s = 1.0 / (1.0 - hurst);
    const double y = std::pow(w, s);
    if (y == 0.0) return 0.0;
    return g(y) * s * std::pow(w, s - 1.0);
  }
  if (w == 0.0) return 0.0;
  return g(w);
}

}  // namespace

double normalizing_constant_CH(double hurst, const QuadratureOptions& options) {
  require_hurst(hurst);
  const double a = hurst - 0.5;
  if (a == 0.0) return 1.0;
  const auto head = integrate_adaptive([&](double y) { return head_integrand(y, a, hurst); }, 0.0, 1.0, options);
  const auto tail = integrate_adaptive([&](double w) { return tail_integrand(w, a, hurst); }, 0.0, 1.0, options);
  return 1.0 / std::sqrt(head.value + tail.value + 1.0 / (2.0 * hurst));
}

MovingAverageSampler::MovingAverageSampler(GridSpec grid, double hurst, MovingAverageOptions options)
    : grid_(grid), hurst_(hurst), options_(options) {
  require_hurst(hurst);
  if (!(options.truncation >= 1.0) || !std::isfinite(options.truncation))
    throw DomainError("moving-average truncation must be >= 1");
  if (options.substeps == 0) throw DomainError("moving-average substeps must be >= 1");

  const double h = 1.0 / static_cast<double>(grid_.size() * options_.substeps);
  lead_cells_ = static_cast<std::size_t>(std::llround(options_.truncation / h));
  c_h_ = normalizing_constant_CH(hurst);
  scale_ = c_h_ * std::pow(h, hurst);

  const std::size_t cells = cell_count();
  const double a = hurst - 0.5;
  weights_.resize(static_cast<Eigen::Index>(cells));
  for (std::size_t j = 0; j < cells; ++j)
    weights_(static_cast<Eigen::Index>(j)) = std::pow(static_cast<double>(cells - j), a);
}

double MovingAverageSampler::causal_sum(const Eigen::VectorXd& z, std::size_t p) const {
  const auto len = static_cast<Eigen::Index>(p);
  return z.head(len).dot(weights_.segment(weights_.size() - len, len));
}

Eigen::VectorXd MovingAverageSampler::draw(RngStream& rng) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(cell_count()));
  rng.fill_gaussian(z);

  const std::size_t n = grid_.size();
  const std::size_t r = options_.substeps;
  const double origin = causal_sum(z, lead_cells_);
  Eigen::VectorXd path(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= n; ++k)
    path(static_cast<Eigen::Index>(k - 1)) = scale_ * (causal_sum(z, lead_cells_ + k * r) - origin);
  return path;
}

Eigen::VectorXd MovingAverageSampler::coefficients(std::size_t k) const {
  const double a = hurst_ - 0.5;
  const std::size_t p = lead_cells_ + k * options_.substeps;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cell_count()));
  for (std::size_t i = 0; i < p; ++i) {
    double v = std::pow(static_cast<double>(p - i), a);
    if (i < lead_cells_) v -= std::pow(static_cast<double>(lead_cells_ - i), a);
    c(static_cast<Eigen::Index>(i)) = v;
  }
  return c;
}

Eigen::MatrixXd MovingAverageSampler::discretized_covariance() const {
  const std::size_t n = grid_.size();
  Eigen::MatrixXd coeff(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cell_count()));
  for (std::size_t k = 1; k <= n; ++k) coeff.row(static_cast<Eigen::Index>(k - 1)) = coefficients(k).transpose();
  return scale_ * scale_ * (coeff * coeff.transpose());
}

double MovingAverageSampler::discretized_covariance(std::size_t j, std::size_t k) const {
  if (j == 0 || k == 0 || j > grid_.size() || k > grid_.size()) throw UsageError("node index out of range");
  const Eigen::VectorXd cj = coefficients(j);
  const double dot = j == k ? cj.squaredNorm() : cj.dot(coefficients(k));
  return scale_ * scale_ * dot;
}

SamplePath ma_truncated_fbm(const GridSpec& grid, double hurst, const MovingAverageOptions& options, RngStream& rng) {
  return make_path(MovingAverageSampler(grid, hurst, options), rng);
}

}  // namespace selfsim
