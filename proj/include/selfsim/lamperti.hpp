#pragma once

// Self-similar paths from a stationary sequence via the modified inverse
// Lamperti transform.
//
// The stationary sequence U(k/n) = n^{-H(k/n-1)} X(n^{k/n-1}), k = 0..n, is
// sampled by circulant embedding of its autocovariance, then mapped back by
//   X~(j/n) = (j/n)^H U(g(j)/n),   g(j) = floor(n log(j) / log(n)).
// Each X~(j/n) has exactly the law of X(j/n); the joint law is only
// approximately that of X.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "selfsim/core.hpp"
#include "selfsim/samplers.hpp"

namespace selfsim {

/// Index map j -> g(j) and residual theta(j) in [0, 1), for j = 1..n.
/// index[j-1] = g(j), residual(j-1) = theta(j).
struct LampertiGridMap {
  std::size_t n = 0;
  std::vector<std::size_t> index;
  Eigen::VectorXd residual;
};

/// Map arguments within this distance of an integer are snapped before flooring.
inline constexpr double kGridSnapTolerance = 1e-9;

LampertiGridMap grid_map(std::size_t n);

/// Var X(t) of the target process.
double target_variance(Process process, double hurst, double t);

class LampertiSampler {
 public:
  LampertiSampler(Process process, double hurst, GridSpec grid, EmbeddingPolicy policy = {});

  Eigen::VectorXd draw(RngStream& rng) const;
  /// The stationary sequence U(0), U(1/n), ..., U(1).
  Eigen::VectorXd draw_stationary(RngStream& rng) const;
  /// Maps a stationary sample (length n + 1) to the self-similar path.
  Eigen::VectorXd transform(const Eigen::VectorXd& stationary) const;

  SamplerInfo info() const;
  const CirculantSpectrum& spectrum() const noexcept { return spectrum_; }
  const LampertiGridMap& map() const noexcept { return map_; }

 private:
  Process process_;
  double hurst_;
  GridSpec grid_;
  LampertiGridMap map_;
  Eigen::VectorXd prefactor_;  // (j/n)^H
  CirculantSpectrum spectrum_;
};

SamplePath simulate_lamperti(Process process, double hurst, const GridSpec& grid, RngStream& rng,
                             const EmbeddingPolicy& policy = {});

struct VarianceNode {
  std::size_t j = 0;
  double t = 0.0;
  double empirical = 0.0;
  double theoretical = 0.0;
  double standard_error = 0.0;  // theoretical * sqrt(2/M)
  double deviation = 0.0;       // |empirical - theoretical| / standard_error
};

/// Empirical vs theoretical marginal variance at every node of the batch grid.
std::vector<VarianceNode> marginal_variance_profile(const ReplicateBatch& batch, Process process, double hurst);

struct ErrorBoundRow {
  std::size_t n = 0;
  double a = 0.0;          // max_j |n^{H theta_j / n} - 1|
  double b = 0.0;          // max_j |n^{-theta_j / n} - 1|
  double a_scaled = 0.0;   // a n / log n
  double b_scaled = 0.0;   // b n / log n
  double a_limit = 0.0;    // mean-value bound H n^{H/n} on a_scaled
  double b_limit = 1.0;    // |e^{-x} - 1| <= x bound on b_scaled
  double holder_rate = 0.0;  // n^{-beta} (log n)^beta
};

struct ErrorBoundReport {
  double hurst = 0.0;
  double beta = 0.0;  // H - 0.01
  std::vector<ErrorBoundRow> rows;
  double c1 = 0.0;  // fitted: max a_scaled
  double c2 = 0.0;  // fitted: max b_scaled
  bool within_limits = false;
  bool decreasing = false;
  bool pass = false;
};

inline constexpr double kHolderEpsilon = 0.01;

/// Deterministic factors of the sup-error bound of the Lamperti approximation.
ErrorBoundReport error_bound_diagnostics(std::span<const std::size_t> sizes, double hurst);

}  // namespace selfsim
