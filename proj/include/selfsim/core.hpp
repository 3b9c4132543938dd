#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "selfsim/errors.hpp"
#include "selfsim/rng.hpp"

namespace selfsim {

enum class Process { bm, fbm, sfbm };
enum class Method { bm_cumsum, cholesky, davies_harte, circulant, ma_truncated, lamperti };

std::string_view to_string(Process p) noexcept;
std::string_view to_string(Method m) noexcept;
std::optional<Process> parse_process(std::string_view s) noexcept;
std::optional<Method> parse_method(std::string_view s) noexcept;

/// Throws DomainError unless 0 < H < 1.
void require_hurst(double hurst);

/// Uniform grid t_j = j/n, j = 1..n, on the unit interval. t = 0 is implicit.
class GridSpec {
 public:
  explicit GridSpec(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  /// t_j for 1-based j; a single division so that t_n == 1 exactly.
  double time(std::size_t j) const noexcept { return static_cast<double>(j) / static_cast<double>(n_); }
  Eigen::VectorXd times() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::size_t n_;
};

/// Numerical repairs a sampler applied, surfaced in path metadata.
struct SampleDiagnostics {
  std::size_t embedding_size = 0;
  std::size_t clamped_count = 0;
  unsigned doublings = 0;
  double jitter = 0.0;
};

struct SamplerInfo {
  GridSpec grid;
  Method method;
  Process process;
  double hurst;
  SampleDiagnostics diagnostics{};
};

struct SamplePath {
  GridSpec grid;
  Eigen::VectorXd values;  // values(j-1) = X(j/n)
  Method method;
  Process process;
  double hurst;
  std::uint64_t seed;
  std::uint64_t stream_id;
  SampleDiagnostics diagnostics{};
};

/// A sampler draws one path of grid.size() values from a stream. draw() must
/// be const and thread-safe; all precomputation happens at construction.
template <typename S>
concept PathSampler = requires(const S& s, RngStream& rng) {
  { s.draw(rng) } -> std::convertible_to<Eigen::VectorXd>;
  { s.info() } -> std::convertible_to<SamplerInfo>;
};

template <PathSampler S>
SamplePath make_path(const S& sampler, RngStream& rng) {
  const SamplerInfo info = sampler.info();
  const std::uint64_t seed = rng.seed();
  const std::uint64_t stream = rng.stream_id();
  return SamplePath{info.grid, sampler.draw(rng), info.method, info.process, info.hurst, seed, stream, info.diagnostics};
}

/// M replicate paths stored row-wise; row i was generated from RngStream(base_seed, i).
class ReplicateBatch {
 public:
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  ReplicateBatch(SamplerInfo info, std::uint64_t base_seed, Matrix values);

  std::size_t count() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::uint64_t base_seed() const noexcept { return base_seed_; }
  const SamplerInfo& info() const noexcept { return info_; }
  const GridSpec& grid() const noexcept { return info_.grid; }
  const Matrix& values() const noexcept { return values_; }

  SamplePath path(std::size_t i) const;

 private:
  SamplerInfo info_;
  std::uint64_t base_seed_;
  Matrix values_;
};

template <PathSampler S>
ReplicateBatch generate_batch(const S& sampler, std::size_t count, std::uint64_t base_seed) {
  if (count == 0) throw UsageError("replicate count must be positive");
  const SamplerInfo info = sampler.info();
  ReplicateBatch::Matrix values(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(info.grid.size()));
  const auto rows = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    RngStream rng(base_seed, static_cast<std::uint64_t>(i));
    values.row(i) = sampler.draw(rng).transpose();
  }
  return ReplicateBatch(info, base_seed, std::move(values));
}

/// Generates paths 0..count-1 in parallel chunks and hands them to sink(i, values)
/// strictly in stream-id order, so output does not depend on scheduling.
template <PathSampler S, typename Sink>
void for_each_path(const S& sampler, std::size_t count, std::uint64_t base_seed, Sink&& sink,
                   std::size_t chunk = 256) {
  std::vector<Eigen::VectorXd> buffer;
  for (std::size_t start = 0; start < count; start += chunk) {
    const std::size_t len = std::min(chunk, count - start);
    buffer.assign(len, Eigen::VectorXd());
    const auto rows = static_cast<std::ptrdiff_t>(len);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
      RngStream rng(base_seed, static_cast<std::uint64_t>(start + static_cast<std::size_t>(i)));
      buffer[static_cast<std::size_t>(i)] = sampler.draw(rng);
    }
    for (std::size_t i = 0; i < len; ++i) sink(start + i, buffer[i]);
  }
}

/// Builds a batch from already-generated paths (all on the same grid).
ReplicateBatch batch_from_paths(const std::vector<SamplePath>& paths);

}  // namespace selfsim
