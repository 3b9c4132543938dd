#pragma once

#include <cstddef>
#include <functional>
#include <utility>

#include <Eigen/Core>

#include "selfsim/core.hpp"
#include "selfsim/covmodels.hpp"
#include "selfsim/quadrature.hpp"

namespace selfsim {

// ---------------------------------------------------------------------------
// Brownian motion by cumulative sums of N(0, 1/n) increments.

class BrownianSampler {
 public:
  explicit BrownianSampler(GridSpec grid) : grid_(grid) {}
  Eigen::VectorXd draw(RngStream& rng) const;
  SamplerInfo info() const { return {grid_, Method::bm_cumsum, Process::bm, 0.5}; }

 private:
  GridSpec grid_;
};

SamplePath sample_bm(const GridSpec& grid, RngStream& rng);

// ---------------------------------------------------------------------------
// Cholesky

/// Lower-triangular factor L with L L^T = gram + jitter * I.
class CholeskyFactor {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  CholeskyFactor(Matrix lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}

  std::size_t size() const noexcept { return static_cast<std::size_t>(lower_.rows()); }
  const Matrix& lower() const noexcept { return lower_; }
  double jitter() const noexcept { return jitter_; }

  Eigen::MatrixXd reconstruct() const { return lower_ * lower_.transpose(); }

  template <typename Derived>
  Eigen::VectorXd apply(const Eigen::MatrixBase<Derived>& z) const {
    return lower_.triangularView<Eigen::Lower>() * z;
  }

 private:
  Matrix lower_;
  double jitter_;
};

/// Jitter ladder, as multiples of the largest diagonal entry.
inline constexpr double kCholeskyJitterLadder[] = {0.0, 1e-14, 1e-12, 1e-10};

/// Factorizes a symmetric matrix, escalating diagonal jitter along the ladder.
/// Throws UsageError for non-square/non-symmetric/non-finite input and
/// NotPositiveDefinite (with the failing pivot) when the ladder is exhausted.
CholeskyFactor cholesky_factor(const Eigen::MatrixXd& gram);

class CholeskySampler {
 public:
  CholeskySampler(const CovarianceKernel<double>& kernel, GridSpec grid);
  Eigen::VectorXd draw(RngStream& rng) const;
  SamplerInfo info() const;
  const CholeskyFactor& factor() const noexcept { return factor_; }

 private:
  CovarianceKernel<double> kernel_;
  GridSpec grid_;
  CholeskyFactor factor_;
};

SamplePath cholesky_sample(const CovarianceKernel<double>& kernel, const GridSpec& grid, RngStream& rng);

// ---------------------------------------------------------------------------
// Circulant embedding

struct EmbeddingPolicy {
  /// When false the embedding stays at the minimal size and every negative
  /// eigenvalue is clamped (Davies-Harte).
  bool allow_doubling = true;
  unsigned max_doublings = 6;
  /// Eigenvalues in [-tolerance * max, 0) count as roundoff and are clamped.
  double tolerance = 1e-9;

  static EmbeddingPolicy fixed() { return {false, 0, 1e-9}; }
};

/// Eigenvalues of the circulant embedding of a stationary covariance on n points.
///
/// The circulant's first row is c_j = rho(min(j, m - j)), j = 0..m-1, and its
/// eigenvalues are lambda_k = sum_j c_j exp(-2 pi i jk/m), the unnormalized
/// forward DFT (real for a symmetric row). Sampling uses the matching scaling
/// sqrt(lambda_k / m).
struct CirculantSpectrum {
  std::size_t m = 0;
  Eigen::VectorXd eigenvalues;
  std::size_t clamped_count = 0;
  unsigned doublings = 0;
  double most_negative = 0.0;  // before clamping
};

using LagFunction = std::function<double(std::size_t)>;

CirculantSpectrum circulant_spectrum(const LagFunction& acf, std::size_t n, const EmbeddingPolicy& policy = {});

template <typename Scalar>
CirculantSpectrum circulant_spectrum(const StationaryACF<Scalar>& acf, std::size_t n,
                                     const EmbeddingPolicy& policy = {}) {
  return circulant_spectrum(LagFunction([&acf](std::size_t k) { return static_cast<double>(acf(k)); }), n, policy);
}

/// One stationary sequence of length n (the real part of one complex synthesis).
Eigen::VectorXd circulant_sample(const CirculantSpectrum& spectrum, std::size_t n, RngStream& rng);

/// Real and imaginary parts of one complex synthesis: two independent sequences.
std::pair<Eigen::VectorXd, Eigen::VectorXd> circulant_sample_pair(const CirculantSpectrum& spectrum, std::size_t n,
                                                                  RngStream& rng);

/// fBm as cumulative sums of circulant-synthesized fGn. With
/// EmbeddingPolicy::fixed() this is Davies-Harte; with doubling it is Wood-Chan.
class CirculantFbmSampler {
 public:
  CirculantFbmSampler(GridSpec grid, double hurst, EmbeddingPolicy policy);
  static CirculantFbmSampler davies_harte(GridSpec grid, double hurst) {
    return {grid, hurst, EmbeddingPolicy::fixed()};
  }

  Eigen::VectorXd draw(RngStream& rng) const;
  /// Increments (fGn) only; draw() is their cumulative sum.
  Eigen::VectorXd draw_increments(RngStream& rng) const;
  SamplerInfo info() const;
  const CirculantSpectrum& spectrum() const noexcept { return spectrum_; }

 private:
  GridSpec grid_;
  double hurst_;
  Method method_;
  CirculantSpectrum spectrum_;
};

SamplePath davies_harte_fbm(const GridSpec& grid, double hurst, RngStream& rng);
SamplePath circulant_fbm(const GridSpec& grid, double hurst, RngStream& rng, const EmbeddingPolicy& policy = {});

// ---------------------------------------------------------------------------
// Truncated moving-average representation

/// C_H = (int_{-inf}^0 ((1-u)^{H-1/2} - (-u)^{H-1/2})^2 du + 1/(2H))^{-1/2}.
double normalizing_constant_CH(double hurst, const QuadratureOptions& options = {});

struct MovingAverageOptions {
  double truncation = 50.0;
  unsigned substeps = 8;
};

/// Left-point Riemann discretization of the moving-average integral over
/// [-T, 1] with step 1/(r n). Cell i spans [u_i, u_i + h), u_i = (i - L) h,
/// L = round(T / h), so the node t_k = k r h sits on a cell boundary.
class MovingAverageSampler {
 public:
  MovingAverageSampler(GridSpec grid, double hurst, MovingAverageOptions options = {});

  Eigen::VectorXd draw(RngStream& rng) const;
  SamplerInfo info() const { return {grid_, Method::ma_truncated, Process::fbm, hurst_}; }

  std::size_t cell_count() const noexcept { return lead_cells_ + grid_.size() * options_.substeps; }
  double normalizing_constant() const noexcept { return c_h_; }

  /// Exact covariance matrix of the discretized scheme (no Monte Carlo).
  Eigen::MatrixXd discretized_covariance() const;
  /// Single entry Cov(X_j, X_k) of the same, 1-based nodes, O(cells) memory.
  double discretized_covariance(std::size_t j, std::size_t k) const;

 private:
  // sum_{i<p} (p - i)^{H-1/2} z_i
  double causal_sum(const Eigen::VectorXd& z, std::size_t p) const;
  // Noise coefficients of X_k / scale_.
  Eigen::VectorXd coefficients(std::size_t k) const;

  GridSpec grid_;
  double hurst_;
  MovingAverageOptions options_;
  std::size_t lead_cells_;  // L
  double c_h_;
  double scale_;            // C_H h^{H}
  Eigen::VectorXd weights_; // weights_(j) = (N - j)^{H-1/2}, N = cell_count()
};

SamplePath ma_truncated_fbm(const GridSpec& grid, double hurst, const MovingAverageOptions& options, RngStream& rng);

}  // namespace selfsim
