#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include <Eigen/Core>

namespace selfsim {

/// Philox4x32-10 counter-based block function.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter counter, Key key) noexcept;
};

/// Deterministic Gaussian stream identified by (seed, stream id).
///
/// The seed is the Philox key; the counter is (block index, stream id), so
/// streams with different ids never share a counter and can be generated in
/// any order or on any thread with identical results.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t blocks_consumed() const noexcept { return block_; }

  Philox4x32::Counter next_block() noexcept;

  /// Two independent standard normals from one Philox block (Box-Muller).
  std::pair<double, double> gaussian_pair() noexcept;

  /// One standard normal; the second half of each pair is kept for the next call.
  double gaussian() noexcept;

  template <typename Derived>
  void fill_gaussian(Eigen::DenseBase<Derived>& out) noexcept {
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = gaussian();
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Key key_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::pair<double, double> gaussian_pair(RngStream& rng) noexcept { return rng.gaussian_pair(); }

}  // namespace selfsim
