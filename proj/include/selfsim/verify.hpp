#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "selfsim/core.hpp"
#include "selfsim/covmodels.hpp"
#include "selfsim/lamperti.hpp"

namespace selfsim {

enum class Verdict { pass, fail, informational };
std::string_view to_string(Verdict v) noexcept;

struct VerificationReport {
  std::string check;
  std::string method;
  std::string process;
  double hurst = 0.0;
  std::size_t n = 0;
  std::size_t m_replicates = 0;
  Verdict verdict = Verdict::fail;
  double worst_deviation = 0.0;
  double tolerance = 0.0;
  nlohmann::json details = nlohmann::json::array();

  bool passed() const noexcept { return verdict == Verdict::pass; }
  nlohmann::json to_json() const;
};

inline constexpr std::size_t kMinCovarianceReplicates = 100;
inline constexpr std::size_t kMinNormalityReplicates = 1000;
/// Asymptotic 1% critical value of the Kolmogorov-Smirnov statistic, times sqrt(M).
inline constexpr double kKsCritical1Percent = 1.63;

/// Unbiased covariance of the columns of a replicates-by-nodes matrix.
template <typename Derived>
Eigen::MatrixXd sample_covariance(const Eigen::MatrixBase<Derived>& rows) {
  const double m = static_cast<double>(rows.rows());
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  return (centered.transpose() * centered) / (m - 1.0);
}

/// Plug-in standard error of a sample covariance under Gaussianity:
/// SE^2 = (c_jj c_kk + c_jk^2) / M.
template <typename Derived>
Eigen::MatrixXd covariance_standard_errors(const Eigen::MatrixBase<Derived>& cov, std::size_t replicates) {
  const Eigen::VectorXd d = cov.diagonal();
  return ((d * d.transpose()).array() + cov.array().square()).sqrt() / std::sqrt(static_cast<double>(replicates));
}

struct CovarianceEstimate {
  std::size_t j = 0;  // 1-based nodes
  std::size_t k = 0;
  double value = 0.0;
  double standard_error = 0.0;
};

std::vector<CovarianceEstimate> empirical_covariance(const ReplicateBatch& batch,
                                                     std::span<const std::pair<std::size_t, std::size_t>> node_pairs);

/// 1-based nodes compared by the covariance checks. stride 0 picks the default:
/// every node for n <= 64, every 4th node (ending at n) above that.
std::vector<std::size_t> comparison_nodes(std::size_t n, std::size_t stride = 0);

/// Passes iff at least 95% of entries are within multiplier * SE and none
/// exceeds 2 * multiplier * SE.
VerificationReport covariance_match(const ReplicateBatch& batch, const CovarianceKernel<double>& kernel,
                                    double multiplier = 4.0, std::size_t stride = 0);

/// KS distance between the standardized sample and the standard normal CDF.
double ks_distance_standard_normal(std::vector<double> standardized);

VerificationReport normality_check(const ReplicateBatch& batch, std::size_t node);
VerificationReport normality_check(const ReplicateBatch& batch, std::span<const std::size_t> nodes);

enum class EquivalenceMode { full, diagonal, informational };

VerificationReport method_equivalence(const ReplicateBatch& a, const ReplicateBatch& b,
                                      EquivalenceMode mode = EquivalenceMode::full, double multiplier = 4.0,
                                      std::size_t stride = 0);

/// Marginal variances at every node against the target process, multiplier * Var sqrt(2/M) each.
VerificationReport marginal_variance_check(const ReplicateBatch& batch, Process process, double hurst,
                                           double multiplier = 4.0);

/// Brownian increment test: each increment variance within multiplier SEs of
/// 1/n, and the mean lag-1 increment correlation within multiplier / sqrt(M) of 0.
VerificationReport increment_check(const ReplicateBatch& batch, double multiplier = 4.0);

/// Deciles of X(a)/a^H against deciles of X(1), paired bootstrap SEs.
VerificationReport scaling_quantile_check(const ReplicateBatch& batch, std::size_t node_a, double hurst,
                                          std::size_t bootstrap = 200, std::uint64_t seed = 0x5CA1E,
                                          double multiplier = 4.0);

VerificationReport error_bound_check(const ErrorBoundReport& diagnostics);

/// Empirical quantile with linear interpolation between order statistics.
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace selfsim
