#include "selfsim/core.hpp"

#include <array>
#include <string>

namespace selfsim {

namespace {

constexpr std::array<std::pair<Process, std::string_view>, 3> kProcessNames{{
    {Process::bm, "bm"}, {Process::fbm, "fbm"}, {Process::sfbm, "sfbm"}}};

constexpr std::array<std::pair<Method, std::string_view>, 6> kMethodNames{{
    {Method::bm_cumsum, "bm-cumsum"},
    {Method::cholesky, "cholesky"},
    {Method::davies_harte, "davies-harte"},
    {Method::circulant, "circulant"},
    {Method::ma_truncated, "ma-truncated"},
    {Method::lamperti, "lamperti"}}};

}  // namespace

std::string_view to_string(Process p) noexcept {
  for (const auto& [value, name] : kProcessNames)
    if (value == p) return name;
  return "?";
}

std::string_view to_string(Method m) noexcept {
  for (const auto& [value, name] : kMethodNames)
    if (value == m) return name;
  return "?";
}

std::optional<Process> parse_process(std::string_view s) noexcept {
  for (const auto& [value, name] : kProcessNames)
    if (name == s) return value;
  return std::nullopt;
}

std::optional<Method> parse_method(std::string_view s) noexcept {
  for (const auto& [value, name] : kMethodNames)
    if (name == s) return value;
  return std::nullopt;
}

void require_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw DomainError("Hurst index must lie in (0,1), got " + std::to_string(hurst));
}

GridSpec::GridSpec(std::size_t n) : n_(n) {
  if (n == 0) throw DomainError("grid needs at least one node");
}

Eigen::VectorXd GridSpec::times() const {
  Eigen::VectorXd t(static_cast<Eigen::Index>(n_));
  for (std::size_t j = 1; j <= n_; ++j) t(static_cast<Eigen::Index>(j - 1)) = time(j);
  return t;
}

ReplicateBatch::ReplicateBatch(SamplerInfo info, std::uint64_t base_seed, Matrix values)
    : info_(std::move(info)), base_seed_(base_seed), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.cols()) != info_.grid.size())
    throw UsageError("batch width does not match grid size");
}

SamplePath ReplicateBatch::path(std::size_t i) const {
  return SamplePath{info_.grid,
                    values_.row(static_cast<Eigen::Index>(i)).transpose(),
                    info_.method,
                    info_.process,
                    info_.hurst,
                    base_seed_,
                    static_cast<std::uint64_t>(i),
                    info_.diagnostics};
}

ReplicateBatch batch_from_paths(const std::vector<SamplePath>& paths) {
  if (paths.empty()) throw UsageError("cannot build a batch from zero paths");
  const auto& first = paths.front();
  ReplicateBatch::Matrix values(static_cast<Eigen::Index>(paths.size()), static_cast<Eigen::Index>(first.grid.size()));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!(paths[i].grid == first.grid)) throw UsageError("paths live on different grids");
    values.row(static_cast<Eigen::Index>(i)) = paths[i].values.transpose();
  }
  return ReplicateBatch(SamplerInfo{first.grid, first.method, first.process, first.hurst, first.diagnostics},
                        first.seed, std::move(values));
}

}  // namespace selfsim
