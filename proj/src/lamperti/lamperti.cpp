#include "selfsim/lamperti.hpp"

#include <algorithm>
#include <cmath>

namespace selfsim {

LampertiGridMap grid_map(std::size_t n) {
  if (n < 2) throw DomainError("Lamperti grid map needs n >= 2");
  LampertiGridMap map;
  map.n = n;
  map.index.resize(n);
  map.residual.resize(static_cast<Eigen::Index>(n));
  const double nn = static_cast<double>(n);
  const double log_n = std::log(nn);
  for (std::size_t j = 1; j <= n; ++j) {
    // (log(j/n)/log(n) + 1) n == n log(j) / log(n)
    const double arg = nn * std::log(static_cast<double>(j)) / log_n;
    const double nearest = std::round(arg);
    const double g = std::abs(arg - nearest) <= kGridSnapTolerance ? nearest : std::floor(arg);
    map.index[j - 1] = static_cast<std::size_t>(g);
    map.residual(static_cast<Eigen::Index>(j - 1)) = std::max(arg - g, 0.0);
  }
  return map;
}

double target_variance(Process process, double hurst, double t) {
  if (process == Process::bm) return t;
  require_hurst(hurst);
  const double scale = process == Process::sfbm ? 2.0 - std::pow(2.0, 2.0 * hurst - 1.0) : 1.0;
  return scale * std::pow(t, 2.0 * hurst);
}

LampertiSampler::LampertiSampler(Process process, double hurst, GridSpec grid, EmbeddingPolicy policy)
    : process_(process == Process::bm ? Process::fbm : process),
      hurst_(process == Process::bm ? 0.5 : hurst),
      grid_(grid),
      map_(grid_map(grid.size())),
      prefactor_(grid.times().array().pow(hurst_)),
      spectrum_(circulant_spectrum(StationaryACF<double>::lamperti(process_, hurst_, grid.size()), grid.size() + 1,
                                   policy)) {}

Eigen::VectorXd LampertiSampler::draw_stationary(RngStream& rng) const {
  return circulant_sample(spectrum_, grid_.size() + 1, rng);
}

Eigen::VectorXd LampertiSampler::transform(const Eigen::VectorXd& stationary) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  if (stationary.size() != n + 1) throw UsageError("stationary sample must have n + 1 values");
  Eigen::VectorXd path(n);
  for (Eigen::Index j = 0; j < n; ++j)
    path(j) = prefactor_(j) * stationary(static_cast<Eigen::Index>(map_.index[static_cast<std::size_t>(j)]));
  return path;
}

Eigen::VectorXd LampertiSampler::draw(RngStream& rng) const { return transform(draw_stationary(rng)); }

SamplerInfo LampertiSampler::info() const {
  SamplerInfo info{grid_, Method::lamperti, process_, hurst_};
  info.diagnostics.embedding_size = spectrum_.m;
  info.diagnostics.clamped_count = spectrum_.clamped_count;
  info.diagnostics.doublings = spectrum_.doublings;
  return info;
}

SamplePath simulate_lamperti(Process process, double hurst, const GridSpec& grid, RngStream& rng,
                             const EmbeddingPolicy& policy) {
  return make_path(LampertiSampler(process, hurst, grid, policy), rng);
}

std::vector<VarianceNode> marginal_variance_profile(const ReplicateBatch& batch, Process process, double hurst) {
  const auto& x = batch.values();
  const auto m = static_cast<double>(batch.count());
  if (batch.count() < 2) throw UsageError("variance profile needs at least two replicates");
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().sum() / (m - 1.0);

  std::vector<VarianceNode> nodes;
  nodes.reserve(batch.grid().size());
  for (std::size_t j = 1; j <= batch.grid().size(); ++j) {
    VarianceNode node;
    node.j = j;
    node.t = batch.grid().time(j);
    node.empirical = var(static_cast<Eigen::Index>(j - 1));
    node.theoretical = target_variance(process, hurst, node.t);
    node.standard_error = node.theoretical * std::sqrt(2.0 / m);
    node.deviation = std::abs(node.empirical - node.theoretical) / node.standard_error;
    nodes.push_back(node);
  }
  return nodes;
}

ErrorBoundReport error_bound_diagnostics(std::span<const std::size_t> sizes, double hurst) {
  require_hurst(hurst);
  if (sizes.empty()) throw UsageError("error-bound diagnostics need at least one grid size");
  ErrorBoundReport report;
  report.hurst = hurst;
  report.beta = hurst - kHolderEpsilon;
  report.within_limits = true;

  std::vector<std::size_t> ladder(sizes.begin(), sizes.end());
  std::sort(ladder.begin(), ladder.end());
  for (std::size_t n : ladder) {
    const auto map = grid_map(n);
    const double nn = static_cast<double>(n);
    const double log_n = std::log(nn);
    ErrorBoundRow row;
    row.n = n;
    for (Eigen::Index j = 0; j < map.residual.size(); ++j) {
      const double theta = map.residual(j);
      row.a = std::max(row.a, std::abs(std::expm1(hurst * theta * log_n / nn)));
      row.b = std::max(row.b, std::abs(std::expm1(-theta * log_n / nn)));
    }
    row.a_scaled = row.a * nn / log_n;
    row.b_scaled = row.b * nn / log_n;
    row.a_limit = hurst * std::exp(hurst * log_n / nn);
    row.b_limit = 1.0;
    row.holder_rate = std::pow(log_n / nn, std::max(report.beta, 0.0));
    report.within_limits = report.within_limits && row.a_scaled <= row.a_limit && row.b_scaled <= row.b_limit;
    report.c1 = std::max(report.c1, row.a_scaled);
    report.c2 = std::max(report.c2, row.b_scaled);
    report.rows.push_back(row);
  }

  report.decreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& prev = report.rows[i - 1];
    const auto& cur = report.rows[i];
    if (!(cur.a < prev.a && cur.b < prev.b)) report.decreasing = false;
  }
  report.pass = report.within_limits && report.decreasing;
  return report;
}

}  // namespace selfsim
