#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "fft.hpp"
#include "selfsim/samplers.hpp"

namespace selfsim {

namespace {

Eigen::VectorXd embedding_eigenvalues(const LagFunction& acf, std::size_t m) {
  std::vector<double> row(m);
  for (std::size_t j = 0; j < m; ++j) row[j] = acf(std::min(j, m - j));
  std::vector<std::complex<double>> spectrum;
  detail::forward_dft(spectrum, row);
  Eigen::VectorXd eig(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) eig(static_cast<Eigen::Index>(k)) = spectrum[k].real();
  return eig;
}

std::vector<std::complex<double>> synthesize(const CirculantSpectrum& spectrum, std::size_t n, RngStream& rng) {
  if (n > spectrum.m / 2 + 1) throw UsageError("sequence length exceeds what the embedding supports");
  const std::size_t m = spectrum.m;
  std::vector<std::complex<double>> weighted(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto [re, im] = rng.gaussian_pair();
    const double amp = std::sqrt(spectrum.eigenvalues(static_cast<Eigen::Index>(k)) / static_cast<double>(m));
    weighted[k] = {amp * re, amp * im};
  }
  std::vector<std::complex<double>> out;
  detail::forward_dft(out, weighted);
  return out;
}

}  // namespace

CirculantSpectrum circulant_spectrum(const LagFunction& acf, std::size_t n, const EmbeddingPolicy& policy) {
  if (n < 2) throw DomainError("circulant embedding needs at least 2 points");
  CirculantSpectrum result;
  result.m = 2 * (n - 1);
  for (;;) {
    Eigen::VectorXd eig = embedding_eigenvalues(acf, result.m);
    const double largest = eig.maxCoeff();
    const double smallest = eig.minCoeff();
    if (!(largest > 0.0)) throw EmbeddingFailure(smallest, result.m);
    result.most_negative = std::min(smallest, 0.0);

    const bool acceptable = smallest >= -policy.tolerance * largest;
    if (acceptable || !policy.allow_doubling) {
      result.clamped_count = static_cast<std::size_t>((eig.array() < 0.0).count());
      result.eigenvalues = eig.cwiseMax(0.0);
      return result;
    }
    if (result.doublings >= policy.max_doublings) throw EmbeddingFailure(smallest, result.m);
    result.m *= 2;
    ++result.doublings;
  }
}

Eigen::VectorXd circulant_sample(const CirculantSpectrum& spectrum, std::size_t n, RngStream& rng) {
  const auto y = synthesize(spectrum, n, rng);
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) out(static_cast<Eigen::Index>(t)) = y[t].real();
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> circulant_sample_pair(const CirculantSpectrum& spectrum, std::size_t n,
                                                                  RngStream& rng) {
  const auto y = synthesize(spectrum, n, rng);
  Eigen::VectorXd re(static_cast<Eigen::Index>(n)), im(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    re(static_cast<Eigen::Index>(t)) = y[t].real();
    im(static_cast<Eigen::Index>(t)) = y[t].imag();
  }
  return {std::move(re), std::move(im)};
}

CirculantFbmSampler::CirculantFbmSampler(GridSpec grid, double hurst, EmbeddingPolicy policy)
    : grid_(grid),
      hurst_(hurst),
      method_(policy.allow_doubling ? Method::circulant : Method::davies_harte),
      spectrum_(circulant_spectrum(StationaryACF<double>(AcfKind::fgn, hurst, grid.size()), grid.size(), policy)) {}

Eigen::VectorXd CirculantFbmSampler::draw_increments(RngStream& rng) const {
  return circulant_sample(spectrum_, grid_.size(), rng);
}

Eigen::VectorXd CirculantFbmSampler::draw(RngStream& rng) const {
  Eigen::VectorXd path = draw_increments(rng);
  for (Eigen::Index k = 1; k < path.size(); ++k) path(k) += path(k - 1);
  return path;
}

SamplerInfo CirculantFbmSampler::info() const {
  SamplerInfo info{grid_, method_, Process::fbm, hurst_};
  info.diagnostics.embedding_size = spectrum_.m;
  info.diagnostics.clamped_count = spectrum_.clamped_count;
  info.diagnostics.doublings = spectrum_.doublings;
  return info;
}

SamplePath davies_harte_fbm(const GridSpec& grid, double hurst, RngStream& rng) {
  return make_path(CirculantFbmSampler::davies_harte(grid, hurst), rng);
}

SamplePath circulant_fbm(const GridSpec& grid, double hurst, RngStream& rng, const EmbeddingPolicy& policy) {
  return make_path(CirculantFbmSampler(grid, hurst, policy), rng);
}

}  // namespace selfsim
