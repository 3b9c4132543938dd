#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <unordered_map>
#include <vector>

#include <fftw3.h>
#include <unsupported/Eigen/FFT>

#ifndef EIGEN_FFTW_DEFAULT
#error "the FFT wrapper expects Eigen's FFTW backend"
#endif

namespace selfsim::detail {

// Eigen::FFT caches plans internally, so each thread keeps its own instance.
// Plans are created lazily from worker threads, hence the thread-safe planner.
inline Eigen::FFT<double>& thread_fft() {
  static const bool planner_ready = [] {
    fftw_make_planner_thread_safe();
    return true;
  }();
  (void)planner_ready;
  thread_local Eigen::FFT<double> fft;
  return fft;
}

inline bool is_smooth(std::size_t m) {
  for (std::size_t p : {2u, 3u, 5u, 7u})
    while (m % p == 0) m /= p;
  return m == 1;
}

// Chirp-z (Bluestein) tables for a length-m DFT evaluated with power-of-two FFTs.
struct Chirp {
  std::size_t padded = 0;
  std::vector<std::complex<double>> phase;       // exp(-i pi j^2 / m), j < m
  std::vector<std::complex<double>> kernel_fft;  // FFT of exp(+i pi j^2 / m), wrapped
};

inline const Chirp& thread_chirp(std::size_t m) {
  thread_local std::unordered_map<std::size_t, Chirp> cache;
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;

  Chirp c;
  c.padded = 1;
  while (c.padded < 2 * m - 1) c.padded *= 2;
  c.phase.resize(m);
  std::vector<std::complex<double>> kernel(c.padded, {0.0, 0.0});
  const std::size_t period = 2 * m;
  for (std::size_t j = 0; j < m; ++j) {
    // j^2 mod 2m keeps the angle exact for large j.
    const auto r = static_cast<double>((static_cast<unsigned __int128>(j) * j) % period);
    const double angle = std::numbers::pi * r / static_cast<double>(m);
    c.phase[j] = std::polar(1.0, -angle);
    kernel[j] = std::conj(c.phase[j]);
    if (j > 0) kernel[c.padded - j] = kernel[j];
  }
  thread_fft().fwd(c.kernel_fft, kernel);
  return cache.emplace(m, std::move(c)).first->second;
}

/// Forward DFT, out_k = sum_j in_j exp(-2 pi i jk/m), O(m log m) for any m.
inline void forward_dft(std::vector<std::complex<double>>& out, const std::vector<std::complex<double>>& in) {
  const std::size_t m = in.size();
  if (m == 0 || is_smooth(m)) {
    thread_fft().fwd(out, in);
    return;
  }
  const Chirp& c = thread_chirp(m);
  thread_local std::vector<std::complex<double>> a, fa, conv;
  a.assign(c.padded, {0.0, 0.0});
  for (std::size_t j = 0; j < m; ++j) a[j] = in[j] * c.phase[j];
  thread_fft().fwd(fa, a);
  for (std::size_t k = 0; k < c.padded; ++k) fa[k] *= c.kernel_fft[k];
  thread_fft().inv(conv, fa);
  out.resize(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = conv[k] * c.phase[k];
}

inline void forward_dft(std::vector<std::complex<double>>& out, const std::vector<double>& in) {
  forward_dft(out, std::vector<std::complex<double>>(in.begin(), in.end()));
}

}  // namespace selfsim::detail
