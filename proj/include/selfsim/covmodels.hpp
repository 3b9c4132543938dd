#pragma once

// Covariance kernels of fBm / sfBm and the stationary autocovariances used by
// the FFT samplers: fractional Gaussian noise and the two Lamperti-transformed
// sequences U(k/n) = n^{-H(k/n-1)} X(n^{k/n-1}).
//
// Everything is templated on the scalar so tests can evaluate the same
// expressions in extended precision.

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "selfsim/core.hpp"

namespace selfsim {

template <typename Scalar>
void require_hurst_scalar(Scalar hurst) {
  if (!(hurst > Scalar(0) && hurst < Scalar(1)))
    throw DomainError("Hurst index must lie in (0,1), got " + std::to_string(static_cast<double>(hurst)));
}

/// Cov(B^H(s), B^H(t)) = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2.
template <typename Scalar>
Scalar fbm_cov(Scalar s, Scalar t, Scalar hurst) {
  using std::abs;
  using std::pow;
  require_hurst_scalar(hurst);
  const Scalar e = Scalar(2) * hurst;
  return (pow(abs(t), e) + pow(abs(s), e) - pow(abs(t - s), e)) / Scalar(2);
}

/// Cov(S^H(s), S^H(t)) = t^{2H} + s^{2H} - ((t+s)^{2H} + |t-s|^{2H}) / 2, for s, t >= 0.
template <typename Scalar>
Scalar sfbm_cov(Scalar s, Scalar t, Scalar hurst) {
  using std::abs;
  using std::pow;
  require_hurst_scalar(hurst);
  if (s < Scalar(0) || t < Scalar(0)) throw DomainError("sfBm covariance is defined for nonnegative times");
  const Scalar e = Scalar(2) * hurst;
  return pow(t, e) + pow(s, e) - (pow(t + s, e) + pow(abs(t - s), e)) / Scalar(2);
}

/// Autocovariance at lag k of fBm increments on the 1/n grid.
template <typename Scalar>
Scalar fgn_acf(std::size_t k, std::size_t n, Scalar hurst) {
  using std::pow;
  require_hurst_scalar(hurst);
  const Scalar e = Scalar(2) * hurst;
  const Scalar kk = static_cast<Scalar>(k);
  const Scalar lower = k == 0 ? Scalar(1) : pow(kk - Scalar(1), e);
  return (pow(kk + Scalar(1), e) + lower - Scalar(2) * pow(kk, e)) /
         (Scalar(2) * pow(static_cast<Scalar>(n), e));
}

namespace detail {

// Log-time step of the Lamperti grid: lag k corresponds to x = k ln(n) / n.
template <typename Scalar>
Scalar lamperti_log_lag(std::size_t k, std::size_t n) {
  using std::log;
  if (n < 2) throw DomainError("Lamperti sequences need n >= 2");
  return static_cast<Scalar>(k) * log(static_cast<Scalar>(n)) / static_cast<Scalar>(n);
}

}  // namespace detail

/// Autocovariance of the Lamperti-transformed fBm sequence:
///   (n^{-Hk/n} + n^{Hk/n} - (n^{k/(2n)} - n^{-k/(2n)})^{2H}) / 2.
/// The last two terms are combined as -e^{Hx} expm1(2H log1p(-e^{-x})) so that
/// large lags (needed after embedding doublings) do not cancel.
template <typename Scalar>
Scalar lamperti_acf_fbm(std::size_t k, std::size_t n, Scalar hurst) {
  using std::exp;
  using std::expm1;
  using std::log1p;
  require_hurst_scalar(hurst);
  if (k == 0) return Scalar(1);
  const Scalar x = detail::lamperti_log_lag<Scalar>(k, n);
  const Scalar tail = -exp(hurst * x) * expm1(Scalar(2) * hurst * log1p(-exp(-x)));
  return (exp(-hurst * x) + tail) / Scalar(2);
}

/// Autocovariance of the Lamperti-transformed sfBm sequence:
///   n^{-Hk/n} + n^{Hk/n} - ((n^{-k/(2n)} + n^{k/(2n)})^{2H} + |n^{-k/(2n)} - n^{k/(2n)}|^{2H}) / 2.
template <typename Scalar>
Scalar lamperti_acf_sfbm(std::size_t k, std::size_t n, Scalar hurst) {
  using std::exp;
  using std::expm1;
  using std::log1p;
  using std::pow;
  require_hurst_scalar(hurst);
  if (k == 0) return Scalar(2) - pow(Scalar(2), Scalar(2) * hurst - Scalar(1));
  const Scalar x = detail::lamperti_log_lag<Scalar>(k, n);
  const Scalar q = exp(-x);
  const Scalar e = Scalar(2) * hurst;
  const Scalar bracket = expm1(e * log1p(q)) + expm1(e * log1p(-q));
  return exp(-hurst * x) - exp(hurst * x) * bracket / Scalar(2);
}

/// Bivariate covariance kernel of a self-similar Gaussian process.
/// Brownian motion is represented as fBm with H = 1/2.
template <typename Scalar = double>
class CovarianceKernel {
 public:
  CovarianceKernel(Process process, Scalar hurst) : process_(process), hurst_(hurst) {
    if (process_ == Process::bm) {
      process_ = Process::fbm;
      hurst_ = Scalar(0.5);
    }
    require_hurst_scalar(hurst_);
  }

  static CovarianceKernel fbm(Scalar hurst) { return {Process::fbm, hurst}; }
  static CovarianceKernel sfbm(Scalar hurst) { return {Process::sfbm, hurst}; }

  Process process() const noexcept { return process_; }
  Scalar hurst() const noexcept { return hurst_; }

  Scalar operator()(Scalar s, Scalar t) const {
    return process_ == Process::sfbm ? sfbm_cov(s, t, hurst_) : fbm_cov(s, t, hurst_);
  }

  Scalar variance(Scalar t) const { return (*this)(t, t); }

  /// Gram matrix on the grid nodes t_1..t_n.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram(const GridSpec& grid) const {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar ti = static_cast<Scalar>(i + 1) / static_cast<Scalar>(n);
      for (Eigen::Index j = 0; j <= i; ++j) {
        const Scalar tj = static_cast<Scalar>(j + 1) / static_cast<Scalar>(n);
        g(i, j) = g(j, i) = (*this)(ti, tj);
      }
    }
    return g;
  }

 private:
  Process process_;
  Scalar hurst_;
};

enum class AcfKind { fgn, lamperti_fbm, lamperti_sfbm };

/// Lag function rho(k) of a discretely sampled stationary Gaussian sequence.
/// Defined for every k >= 0 by its closed form.
template <typename Scalar = double>
class StationaryACF {
 public:
  StationaryACF(AcfKind kind, Scalar hurst, std::size_t n) : kind_(kind), hurst_(hurst), n_(n) {
    require_hurst_scalar(hurst);
    if (n == 0) throw DomainError("ACF grid size must be positive");
    if (kind != AcfKind::fgn && n < 2) throw DomainError("Lamperti sequences need n >= 2");
  }

  /// The Lamperti sequence U(k/n) of the given self-similar process.
  static StationaryACF lamperti(Process process, Scalar hurst, std::size_t n) {
    if (process == Process::bm) return {AcfKind::lamperti_fbm, Scalar(0.5), n};
    return {process == Process::sfbm ? AcfKind::lamperti_sfbm : AcfKind::lamperti_fbm, hurst, n};
  }

  AcfKind kind() const noexcept { return kind_; }
  Scalar hurst() const noexcept { return hurst_; }
  std::size_t n() const noexcept { return n_; }

  Scalar operator()(std::size_t k) const {
    switch (kind_) {
      case AcfKind::fgn: return fgn_acf<Scalar>(k, n_, hurst_);
      case AcfKind::lamperti_fbm: return lamperti_acf_fbm<Scalar>(k, n_, hurst_);
      case AcfKind::lamperti_sfbm: return lamperti_acf_sfbm<Scalar>(k, n_, hurst_);
    }
    return Scalar(0);
  }

 private:
  AcfKind kind_;
  Scalar hurst_;
  std::size_t n_;
};

}  // namespace selfsim
