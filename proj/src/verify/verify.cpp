#include "selfsim/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace selfsim {

namespace {

double z_score(double diff, double se) {
  if (se > 0.0) return std::abs(diff) / se;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

VerificationReport blank_report(std::string check, const ReplicateBatch& batch) {
  VerificationReport r;
  r.check = std::move(check);
  r.method = std::string(to_string(batch.info().method));
  r.process = std::string(to_string(batch.info().process));
  r.hurst = batch.info().hurst;
  r.n = batch.grid().size();
  r.m_replicates = batch.count();
  return r;
}

void require_replicates(const ReplicateBatch& batch, std::size_t minimum, const char* what) {
  if (batch.count() < minimum)
    throw UsageError(std::string(what) + " needs at least " + std::to_string(minimum) + " replicates");
}

ReplicateBatch::Matrix select_columns(const ReplicateBatch& batch, const std::vector<std::size_t>& nodes) {
  ReplicateBatch::Matrix out(batch.values().rows(), static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t c = 0; c < nodes.size(); ++c)
    out.col(static_cast<Eigen::Index>(c)) = batch.values().col(static_cast<Eigen::Index>(nodes[c] - 1));
  return out;
}

struct Tally {
  std::size_t total = 0;
  std::size_t within = 0;
  double worst = 0.0;

  void add(double z, double multiplier) {
    ++total;
    if (z <= multiplier) ++within;
    worst = std::max(worst, z);
  }
  bool passes(double multiplier) const {
    return total > 0 && static_cast<double>(within) >= 0.95 * static_cast<double>(total) && worst <= 2.0 * multiplier;
  }
};

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::informational: return "informational";
  }
  return "?";
}

nlohmann::json VerificationReport::to_json() const {
  return nlohmann::json{{"check", check},
                        {"method", method},
                        {"process", process},
                        {"hurst", hurst},
                        {"n", n},
                        {"m_replicates", m_replicates},
                        {"verdict", std::string(to_string(verdict))},
                        {"worst_deviation", worst_deviation},
                        {"tolerance", tolerance},
                        {"details", details}};
}

std::vector<CovarianceEstimate> empirical_covariance(const ReplicateBatch& batch,
                                                     std::span<const std::pair<std::size_t, std::size_t>> node_pairs) {
  require_replicates(batch, kMinCovarianceReplicates, "empirical covariance");
  const auto& x = batch.values();
  const double m = static_cast<double>(batch.count());
  const Eigen::RowVectorXd mean = x.colwise().mean();
  auto cov = [&](std::size_t j, std::size_t k) {
    const auto cj = static_cast<Eigen::Index>(j - 1);
    const auto ck = static_cast<Eigen::Index>(k - 1);
    return ((x.col(cj).array() - mean(cj)) * (x.col(ck).array() - mean(ck))).sum() / (m - 1.0);
  };

  std::vector<CovarianceEstimate> out;
  out.reserve(node_pairs.size());
  for (const auto& [j, k] : node_pairs) {
    if (j == 0 || k == 0 || j > batch.grid().size() || k > batch.grid().size())
      throw UsageError("covariance node index out of range");
    const double cjk = cov(j, k);
    const double se = std::sqrt((cov(j, j) * cov(k, k) + cjk * cjk) / m);
    out.push_back({j, k, cjk, se});
  }
  return out;
}

std::vector<std::size_t> comparison_nodes(std::size_t n, std::size_t stride) {
  if (stride == 0) stride = n > 64 ? 4 : 1;
  std::vector<std::size_t> nodes;
  for (std::size_t j = n % stride == 0 ? stride : n % stride; j <= n; j += stride) nodes.push_back(j);
  return nodes;
}

VerificationReport covariance_match(const ReplicateBatch& batch, const CovarianceKernel<double>& kernel,
                                    double multiplier, std::size_t stride) {
  require_replicates(batch, kMinCovarianceReplicates, "covariance match");
  VerificationReport report = blank_report("covariance", batch);
  report.tolerance = multiplier;

  const auto nodes = comparison_nodes(batch.grid().size(), stride);
  const auto sub = select_columns(batch, nodes);
  const Eigen::MatrixXd cov = sample_covariance(sub);
  const Eigen::MatrixXd se = covariance_standard_errors(cov, batch.count());

  Tally tally;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
      const double exact = kernel(batch.grid().time(nodes[a]), batch.grid().time(nodes[b]));
      const double z = z_score(cov(ia, ib) - exact, se(ia, ib));
      tally.add(z, multiplier);
      report.details.push_back(
          {{"j", nodes[a]}, {"k", nodes[b]}, {"empirical", cov(ia, ib)}, {"exact", exact}, {"se", se(ia, ib)}, {"z", z}});
    }
  }
  report.worst_deviation = tally.worst;
  report.verdict = tally.passes(multiplier) ? Verdict::pass : Verdict::fail;
  return report;
}

double ks_distance_standard_normal(std::vector<double> standardized) {
  std::sort(standardized.begin(), standardized.end());
  const double m = static_cast<double>(standardized.size());
  double d = 0.0;
  for (std::size_t i = 0; i < standardized.size(); ++i) {
    const double f = standard_normal_cdf(standardized[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

VerificationReport normality_check(const ReplicateBatch& batch, std::size_t node) {
  const std::size_t nodes[] = {node};
  return normality_check(batch, nodes);
}

VerificationReport normality_check(const ReplicateBatch& batch, std::span<const std::size_t> nodes) {
  require_replicates(batch, kMinNormalityReplicates, "normality check");
  VerificationReport report = blank_report("normality", batch);
  const double m = static_cast<double>(batch.count());
  report.tolerance = kKsCritical1Percent / std::sqrt(m);

  bool ok = true;
  for (std::size_t node : nodes) {
    if (node == 0 || node > batch.grid().size()) throw UsageError("normality node out of range");
    const auto col = batch.values().col(static_cast<Eigen::Index>(node - 1));
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (m - 1.0));
    std::vector<double> z(static_cast<std::size_t>(col.size()));
    for (Eigen::Index i = 0; i < col.size(); ++i) z[static_cast<std::size_t>(i)] = sd > 0.0 ? (col(i) - mean) / sd : 0.0;
    const double d = ks_distance_standard_normal(std::move(z));
    ok = ok && d <= report.tolerance;
    report.worst_deviation = std::max(report.worst_deviation, d);
    report.details.push_back({{"j", node}, {"ks_distance", d}, {"mean", mean}, {"sd", sd}});
  }
  report.verdict = ok ? Verdict::pass : Verdict::fail;
  return report;
}

VerificationReport method_equivalence(const ReplicateBatch& a, const ReplicateBatch& b, EquivalenceMode mode,
                                      double multiplier, std::size_t stride) {
  if (!(a.grid() == b.grid())) throw UsageError("method equivalence needs batches on the same grid");
  if (a.info().process != b.info().process || a.info().hurst != b.info().hurst)
    throw UsageError("method equivalence needs batches of the same process and Hurst index");
  require_replicates(a, kMinCovarianceReplicates, "method equivalence");
  require_replicates(b, kMinCovarianceReplicates, "method equivalence");

  VerificationReport report = blank_report("equivalence", a);
  report.method = std::string(to_string(a.info().method)) + " vs " + std::string(to_string(b.info().method));
  report.m_replicates = std::min(a.count(), b.count());
  report.tolerance = multiplier;

  const auto nodes = comparison_nodes(a.grid().size(), stride);
  const Eigen::MatrixXd cov_a = sample_covariance(select_columns(a, nodes));
  const Eigen::MatrixXd cov_b = sample_covariance(select_columns(b, nodes));
  const Eigen::MatrixXd se_a = covariance_standard_errors(cov_a, a.count());
  const Eigen::MatrixXd se_b = covariance_standard_errors(cov_b, b.count());

  Tally tally;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t k = 0; k <= i; ++k) {
      if (mode == EquivalenceMode::diagonal && i != k) continue;
      const auto ii = static_cast<Eigen::Index>(i), kk = static_cast<Eigen::Index>(k);
      const double pooled = std::hypot(se_a(ii, kk), se_b(ii, kk));
      const double z = z_score(cov_a(ii, kk) - cov_b(ii, kk), pooled);
      tally.add(z, multiplier);
      report.details.push_back(
          {{"j", nodes[i]}, {"k", nodes[k]}, {"a", cov_a(ii, kk)}, {"b", cov_b(ii, kk)}, {"se", pooled}, {"z", z}});
    }
  }
  report.worst_deviation = tally.worst;
  if (mode == EquivalenceMode::informational)
    report.verdict = Verdict::informational;
  else
    report.verdict = tally.passes(multiplier) ? Verdict::pass : Verdict::fail;
  return report;
}

VerificationReport marginal_variance_check(const ReplicateBatch& batch, Process process, double hurst,
                                           double multiplier) {
  VerificationReport report = blank_report("marginals", batch);
  report.process = std::string(to_string(process));
  report.hurst = process == Process::bm ? 0.5 : hurst;
  report.tolerance = multiplier;
  bool ok = true;
  for (const auto& node : marginal_variance_profile(batch, process, hurst)) {
    ok = ok && node.deviation <= multiplier;
    report.worst_deviation = std::max(report.worst_deviation, node.deviation);
    report.details.push_back({{"j", node.j},
                              {"t", node.t},
                              {"empirical", node.empirical},
                              {"theoretical", node.theoretical},
                              {"se", node.standard_error},
                              {"z", node.deviation}});
  }
  report.verdict = ok ? Verdict::pass : Verdict::fail;
  return report;
}

VerificationReport increment_check(const ReplicateBatch& batch, double multiplier) {
  require_replicates(batch, kMinCovarianceReplicates, "increment check");
  VerificationReport report = blank_report("increments", batch);
  report.tolerance = multiplier;

  const auto& x = batch.values();
  const Eigen::Index n = x.cols();
  const double m = static_cast<double>(batch.count());
  ReplicateBatch::Matrix inc(x.rows(), n);
  inc.col(0) = x.col(0);
  inc.rightCols(n - 1) = x.rightCols(n - 1) - x.leftCols(n - 1);

  const Eigen::RowVectorXd mean = inc.colwise().mean();
  const ReplicateBatch::Matrix centered = inc.rowwise() - mean;
  const Eigen::RowVectorXd var = centered.array().square().colwise().sum() / (m - 1.0);

  const double target = 1.0 / static_cast<double>(n);
  const double se = target * std::sqrt(2.0 / m);
  bool ok = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = z_score(var(i) - target, se);
    ok = ok && z <= multiplier;
    report.worst_deviation = std::max(report.worst_deviation, z);
    report.details.push_back({{"increment", i + 1}, {"variance", var(i)}, {"target", target}, {"se", se}, {"z", z}});
  }

  double corr_sum = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double c = centered.col(i).dot(centered.col(i + 1)) / (m - 1.0);
    const double denom = std::sqrt(var(i) * var(i + 1));
    corr_sum += denom > 0.0 ? c / denom : 0.0;
  }
  const double mean_corr = n > 1 ? corr_sum / static_cast<double>(n - 1) : 0.0;
  const double corr_z = std::abs(mean_corr) * std::sqrt(m);
  ok = ok && corr_z <= multiplier;
  report.worst_deviation = std::max(report.worst_deviation, corr_z);
  report.details.push_back({{"lag1_mean_correlation", mean_corr}, {"tolerance", multiplier / std::sqrt(m)}, {"z", corr_z}});
  report.verdict = ok ? Verdict::pass : Verdict::fail;
  return report;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw UsageError("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

VerificationReport scaling_quantile_check(const ReplicateBatch& batch, std::size_t node_a, double hurst,
                                          std::size_t bootstrap, std::uint64_t seed, double multiplier) {
  require_replicates(batch, kMinCovarianceReplicates, "scaling check");
  const std::size_t n = batch.grid().size();
  if (node_a == 0 || node_a > n) throw UsageError("scaling node out of range");
  if (bootstrap < 2) throw UsageError("bootstrap needs at least two resamples");

  VerificationReport report = blank_report("scaling", batch);
  report.tolerance = multiplier;
  const double a = batch.grid().time(node_a);
  const double scale = std::pow(a, hurst);
  const auto count = batch.count();
  const auto col_a = batch.values().col(static_cast<Eigen::Index>(node_a - 1));
  const auto col_1 = batch.values().col(static_cast<Eigen::Index>(n - 1));

  constexpr std::size_t kLevels = 9;
  auto decile_gaps = [&](const std::vector<std::size_t>* resample) {
    std::vector<double> u(count), v(count);
    for (std::size_t i = 0; i < count; ++i) {
      const auto r = static_cast<Eigen::Index>(resample ? (*resample)[i] : i);
      u[i] = col_a(r) / scale;
      v[i] = col_1(r);
    }
    std::sort(u.begin(), u.end());
    std::sort(v.begin(), v.end());
    std::array<double, kLevels> gaps{};
    for (std::size_t q = 0; q < kLevels; ++q) {
      const double p = 0.1 * static_cast<double>(q + 1);
      gaps[q] = quantile_sorted(u, p) - quantile_sorted(v, p);
    }
    return gaps;
  };

  const auto observed = decile_gaps(nullptr);
  std::array<double, kLevels> sum{}, sum_sq{};
  RngStream rng(seed, 0);
  std::vector<std::size_t> resample(count);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    for (std::size_t i = 0; i < count; i += 2) {
      const auto w = rng.next_block();
      const std::uint64_t r0 = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
      const std::uint64_t r1 = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
      resample[i] = static_cast<std::size_t>((static_cast<unsigned __int128>(r0) * count) >> 64);
      if (i + 1 < count) resample[i + 1] = static_cast<std::size_t>((static_cast<unsigned __int128>(r1) * count) >> 64);
    }
    const auto g = decile_gaps(&resample);
    for (std::size_t q = 0; q < kLevels; ++q) {
      sum[q] += g[q];
      sum_sq[q] += g[q] * g[q];
    }
  }

  bool ok = true;
  const double bb = static_cast<double>(bootstrap);
  for (std::size_t q = 0; q < kLevels; ++q) {
    const double mean = sum[q] / bb;
    const double se = std::sqrt(std::max(sum_sq[q] / bb - mean * mean, 0.0) * bb / (bb - 1.0));
    const double z = z_score(observed[q], se);
    ok = ok && z <= multiplier;
    report.worst_deviation = std::max(report.worst_deviation, z);
    report.details.push_back(
        {{"level", 0.1 * static_cast<double>(q + 1)}, {"gap", observed[q]}, {"bootstrap_se", se}, {"z", z}});
  }
  report.details.push_back({{"a", a}, {"node", node_a}, {"bootstrap", bootstrap}});
  report.verdict = ok ? Verdict::pass : Verdict::fail;
  return report;
}

VerificationReport error_bound_check(const ErrorBoundReport& diagnostics) {
  VerificationReport report;
  report.check = "error-bound";
  report.method = "lamperti";
  report.process = "any";
  report.hurst = diagnostics.hurst;
  report.tolerance = 1.0;
  for (const auto& row : diagnostics.rows) {
    report.n = std::max(report.n, row.n);
    report.worst_deviation =
        std::max({report.worst_deviation, row.a_scaled / row.a_limit, row.b_scaled / row.b_limit});
    report.details.push_back({{"n", row.n},
                              {"a", row.a},
                              {"b", row.b},
                              {"a_scaled", row.a_scaled},
                              {"b_scaled", row.b_scaled},
                              {"a_limit", row.a_limit},
                              {"b_limit", row.b_limit},
                              {"holder_rate", row.holder_rate}});
  }
  report.details.push_back({{"c1", diagnostics.c1},
                            {"c2", diagnostics.c2},
                            {"beta", diagnostics.beta},
                            {"decreasing", diagnostics.decreasing},
                            {"within_limits", diagnostics.within_limits}});
  report.verdict = diagnostics.pass ? Verdict::pass : Verdict::fail;
  return report;
}

}  // namespace selfsim
