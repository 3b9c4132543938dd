#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "selfsim/covmodels.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/quadrature.hpp"
#include "selfsim/samplers.hpp"
#include "selfsim/verify.hpp"

using namespace selfsim;

namespace {

double sample_variance(const Eigen::VectorXd& x) {
  const double mean = x.mean();
  return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

// Var of one node over M replicates.
template <typename S>
double node_variance(const S& sampler, std::size_t node, std::size_t m, std::uint64_t seed) {
  const auto batch = generate_batch(sampler, m, seed);
  return sample_variance(batch.values().col(static_cast<Eigen::Index>(node - 1)));
}

bool within_sd(double empirical, double target, std::size_t m) {
  return std::abs(empirical - target) <= 4.0 * target * std::sqrt(2.0 / static_cast<double>(m));
}

}  // namespace

TEST_CASE("brownian cumulative sum") {
  const GridSpec g(32);
  const BrownianSampler s(g);
  RngStream a(3, 0), b(3, 0);
  const Eigen::VectorXd x = s.draw(a);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += b.gaussian() / std::sqrt(32.0);
    CHECK(x(i) == doctest::Approx(acc).epsilon(1e-14));
  }
  CHECK(within_sd(node_variance(s, 16, 20000, 1), 0.5, 20000));
  CHECK(within_sd(node_variance(s, 32, 20000, 2), 1.0, 20000));
  RngStream c(3, 0);
  const auto p = sample_bm(g, c);
  CHECK(p.values == x);
  CHECK(p.process == Process::bm);
}

TEST_CASE("cholesky factor reconstructs the gram matrix") {
  const Eigen::MatrixXd g = CovarianceKernel<double>::fbm(0.7).gram(GridSpec(64));
  const auto f = cholesky_factor(g);
  CHECK(f.size() == 64);
  CHECK(f.jitter() == 0.0);
  CHECK((f.reconstruct() - g).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(f.lower().triangularView<Eigen::StrictlyUpper>().toDenseMatrix().cwiseAbs().maxCoeff() == 0.0);
  const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(64, -1.0, 1.0);
  CHECK((f.apply(z) - Eigen::MatrixXd(f.lower()) * z).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("cholesky jitter and failures") {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  const auto f = cholesky_factor(ones);
  CHECK(f.jitter() > 0.0);
  CHECK(f.jitter() <= 1e-10);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  try {
    (void)cholesky_factor(indefinite);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 1);
    CHECK(e.last_jitter() == doctest::Approx(1e-10));
  }

  Eigen::MatrixXd skew(2, 2);
  skew << 1.0, 0.5, 0.4, 1.0;
  CHECK_THROWS_AS(cholesky_factor(skew), UsageError);
  CHECK_THROWS_AS(cholesky_factor(Eigen::MatrixXd::Ones(2, 3)), UsageError);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(cholesky_factor(nan), UsageError);
}

TEST_CASE("cholesky sampler marginals") {
  for (auto p : {Process::fbm, Process::sfbm}) {
    const CovarianceKernel<double> k(p, 0.3);
    const CholeskySampler s(k, GridSpec(16));
    CHECK(s.info().method == Method::cholesky);
    CHECK(within_sd(node_variance(s, 8, 20000, 4), k.variance(0.5), 20000));
    CHECK(within_sd(node_variance(s, 16, 20000, 5), k.variance(1.0), 20000));
  }
}

TEST_CASE("fgn embedding at minimal size is nonnegative") {
  for (int hi = 1; hi <= 9; ++hi) {
    const auto sp = circulant_spectrum(StationaryACF<double>(AcfKind::fgn, 0.1 * hi, 1024), 1024,
                                       EmbeddingPolicy::fixed());
    CHECK(sp.m == 2046);
    CHECK(sp.clamped_count == 0);
    CHECK(sp.doublings == 0);
  }
}

TEST_CASE("embedding eigenvalues equal a direct DFT of the first row") {
  for (std::size_t n : {5u, 12u, 17u, 64u, 1000u}) {
    const StationaryACF<double> acf(AcfKind::fgn, 0.8, n);
    const auto sp = circulant_spectrum(acf, n, EmbeddingPolicy::fixed());
    const std::size_t m = sp.m;
    double worst = 0.0;
    for (std::size_t k = 0; k < m; k += std::max<std::size_t>(1, m / 40)) {
      long double sum = 0.0L;
      for (std::size_t j = 0; j < m; ++j) {
        const long double angle = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>((j * k) % m) / m;
        sum += acf(std::min(j, m - j)) * std::cos(angle);
      }
      worst = std::max(worst, std::abs(sp.eigenvalues(static_cast<Eigen::Index>(k)) - static_cast<double>(sum)));
    }
    CHECK_MESSAGE(worst < 1e-12, "n=" << n);
    CHECK(sp.eigenvalues.sum() / static_cast<double>(m) == doctest::Approx(acf(0)).epsilon(1e-12));
  }
}

TEST_CASE("embedding doubling and failure") {
  const auto acf = StationaryACF<double>::lamperti(Process::fbm, 0.9, 8);
  const auto sp = circulant_spectrum(acf, 9);
  CHECK(sp.doublings == 3);
  CHECK(sp.m == 128);
  CHECK(sp.clamped_count == 0);
  CHECK(sp.eigenvalues.minCoeff() >= 0.0);

  const auto fixed = circulant_spectrum(acf, 9, EmbeddingPolicy::fixed());
  CHECK(fixed.m == 16);
  CHECK(fixed.clamped_count > 0);
  CHECK(fixed.most_negative < 0.0);

  const auto bad = StationaryACF<double>::lamperti(Process::fbm, 0.99, 8);
  CHECK_THROWS_AS(circulant_spectrum(bad, 9), EmbeddingFailure);
  CHECK_THROWS_AS(circulant_spectrum(acf, 9, {true, 2, 1e-9}), EmbeddingFailure);
  CHECK_THROWS_AS(circulant_spectrum(acf, 1), DomainError);
}

TEST_CASE("circulant synthesis covariance") {
  // AR(1) autocovariance, a valid stationary law with a positive embedding.
  const LagFunction ar = [](std::size_t k) { return std::pow(0.6, static_cast<double>(k)); };
  const auto sp = circulant_spectrum(ar, 6);
  const std::size_t m = 40000;
  Eigen::MatrixXd re(m, 6), im(m, 6);
  for (std::size_t i = 0; i < m; ++i) {
    RngStream rng(21, i);
    auto [a, b] = circulant_sample_pair(sp, 6, rng);
    re.row(static_cast<Eigen::Index>(i)) = a.transpose();
    im.row(static_cast<Eigen::Index>(i)) = b.transpose();
  }
  const double se = std::sqrt(2.0 / m);
  for (int lag = 0; lag < 6; ++lag) {
    const double c = re.col(0).dot(re.col(lag)) / m;
    CHECK(std::abs(c - std::pow(0.6, lag)) < 4.0 * se);
  }
  CHECK(std::abs(re.col(2).dot(im.col(2)) / m) < 4.0 / std::sqrt(m));
  RngStream rng(1, 1);
  CHECK_THROWS_AS(circulant_sample(sp, 7, rng), UsageError);
}

TEST_CASE("davies-harte path is the cumulative sum of its increments") {
  const auto s = CirculantFbmSampler::davies_harte(GridSpec(50), 0.35);
  CHECK(s.info().method == Method::davies_harte);
  CHECK(s.spectrum().m == 98);
  RngStream a(8, 2), b(8, 2);
  const Eigen::VectorXd path = s.draw(a);
  const Eigen::VectorXd inc = s.draw_increments(b);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < inc.size(); ++i) {
    acc += inc(i);
    CHECK(path(i) == doctest::Approx(acc).epsilon(1e-13));
  }
}

TEST_CASE("fft fbm samplers have fbm marginals") {
  const GridSpec g(37);
  for (double h : {0.25, 0.8}) {
    const auto dh = CirculantFbmSampler::davies_harte(g, h);
    const CirculantFbmSampler wc(g, h, EmbeddingPolicy{});
    CHECK(wc.info().method == Method::circulant);
    CHECK(within_sd(node_variance(dh, 37, 20000, 6), 1.0, 20000));
    CHECK(within_sd(node_variance(wc, 20, 20000, 7), std::pow(20.0 / 37.0, 2 * h), 20000));
  }
  RngStream rng(1, 0);
  CHECK(davies_harte_fbm(g, 0.5, rng).method == Method::davies_harte);
  CHECK(circulant_fbm(g, 0.5, rng).method == Method::circulant);
}

TEST_CASE("adaptive quadrature") {
  CHECK(integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0).value ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0).value ==
        doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integrate_adaptive([](double x) { return std::exp(-x * x); }, -3.0, 3.0).value ==
        doctest::Approx(std::sqrt(std::numbers::pi) * std::erf(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / x; }, 0.0, 1.0, {1e-12, 1e-14, 50}),
                  QuadratureError);
}

TEST_CASE("moving-average normalizing constant") {
  CHECK(normalizing_constant_CH(0.5) == 1.0);
  CHECK(normalizing_constant_CH(0.2) == doctest::Approx(0.5563428650071969802).epsilon(1e-10));
  CHECK(normalizing_constant_CH(0.3) == doctest::Approx(0.7302829340799229657).epsilon(1e-10));
  CHECK(normalizing_constant_CH(0.7) == doctest::Approx(1.0918091308839125879).epsilon(1e-10));
  CHECK(normalizing_constant_CH(0.8) == doctest::Approx(1.0214099061575616827).epsilon(1e-10));
  CHECK_THROWS_AS(normalizing_constant_CH(1.0), DomainError);
}

TEST_CASE("moving-average layout and validation") {
  const MovingAverageSampler s(GridSpec(8), 0.7, {2.0, 4});
  CHECK(s.cell_count() == 64 + 32);
  CHECK(s.normalizing_constant() == doctest::Approx(1.0918091308839125879).epsilon(1e-10));
  CHECK_THROWS_AS(MovingAverageSampler(GridSpec(8), 0.7, {0.5, 4}), DomainError);
  CHECK_THROWS_AS(MovingAverageSampler(GridSpec(8), 0.7, {2.0, 0}), DomainError);

  const Eigen::MatrixXd cov = s.discretized_covariance();
  CHECK(s.discretized_covariance(3, 7) == doctest::Approx(cov(2, 6)).epsilon(1e-14));
  CHECK(s.discretized_covariance(8, 8) == doctest::Approx(cov(7, 7)).epsilon(1e-14));
  CHECK_THROWS_AS(s.discretized_covariance(0, 1), UsageError);
}

TEST_CASE("moving-average draws follow the discretized covariance") {
  const MovingAverageSampler s(GridSpec(16), 0.3, {4.0, 4});
  const double target = s.discretized_covariance(16, 16);
  CHECK(within_sd(node_variance(s, 16, 20000, 9), target, 20000));
}

TEST_CASE("moving-average variance converges with the truncation horizon") {
  const MovingAverageSampler wide(GridSpec(64), 0.7, {1000.0, 8});
  const double v = wide.discretized_covariance(64, 64);
  CHECK(std::abs(v - 1.0) < 1e-3);
  CHECK(v == doctest::Approx(0.99911355784).epsilon(1e-9));

  const double short_horizon = MovingAverageSampler(GridSpec(64), 0.8, {2.0, 8}).discretized_covariance(64, 64);
  const double long_horizon = MovingAverageSampler(GridSpec(64), 0.8, {50.0, 8}).discretized_covariance(64, 64);
  CHECK(short_horizon < long_horizon);
  CHECK(long_horizon < 1.0);
}

TEST_CASE("brownian reference moments") {
  const auto b = generate_batch(BrownianSampler(GridSpec(2)), 100000, 61);
  const Eigen::MatrixXd c = sample_covariance(b.values());
  CHECK(std::abs(c(1, 1) - 1.0) < 0.02);
  CHECK(std::abs(c(0, 1) - 0.5) < 0.02);

  RngStream a(5, 5), z(5, 5);
  const auto one = sample_bm(GridSpec(1), a);
  REQUIRE(one.values.size() == 1);
  CHECK(one.values(0) == z.gaussian());
}

TEST_CASE("cholesky reference cases") {
  const auto id = cholesky_factor(Eigen::MatrixXd::Identity(5, 5));
  CHECK(id.jitter() == 0.0);
  CHECK((Eigen::MatrixXd(id.lower()) - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);

  const auto bm = cholesky_factor(CovarianceKernel<double>::fbm(0.5).gram(GridSpec(4)));
  CHECK(bm.reconstruct()(3, 3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bm.reconstruct()(1, 3) == doctest::Approx(0.5).epsilon(1e-15));

  // Rotated diag(1, 0.5, -1e-14): one tiny negative eigenvalue.
  const double c = std::cos(0.7), s = std::sin(0.7);
  Eigen::Matrix3d q;
  q << c, -s, 0, s * c, c * c, -s, s * s, s * c, c;
  const Eigen::Vector3d d(1.0, 0.5, -1e-14);
  Eigen::MatrixXd a = q * d.asDiagonal() * q.transpose();
  a = 0.5 * (a + a.transpose()).eval();
  const auto f = cholesky_factor(a);
  CHECK(f.jitter() <= 1e-12 * a.diagonal().maxCoeff());
  CHECK((f.reconstruct() - a).cwiseAbs().maxCoeff() <= 1e-8 * a.diagonal().maxCoeff());
}

TEST_CASE("cholesky sampler reference checks") {
  const auto b = generate_batch(CholeskySampler(CovarianceKernel<double>::fbm(0.7), GridSpec(16)), 50000, 62);
  const std::vector<std::pair<std::size_t, std::size_t>> pair{{8, 16}};
  const auto est = empirical_covariance(b, pair);
  CHECK(std::abs(est[0].value - fbm_cov(0.5, 1.0, 0.7)) <= 4.0 * est[0].standard_error);

  const auto half = generate_batch(CholeskySampler(CovarianceKernel<double>::fbm(0.5), GridSpec(32)), 20000, 63);
  CHECK(increment_check(half).passed());

  RngStream x(3, 3), y(3, 3);
  CHECK(cholesky_sample(CovarianceKernel<double>::sfbm(0.4), GridSpec(8), x).values ==
        cholesky_sample(CovarianceKernel<double>::sfbm(0.4), GridSpec(8), y).values);
}

TEST_CASE("white noise embedding") {
  const LagFunction white = [](std::size_t k) { return k == 0 ? 1.0 : 0.0; };
  const auto sp = circulant_spectrum(white, 33);
  CHECK(sp.clamped_count == 0);
  CHECK((sp.eigenvalues.array() - 1.0).abs().maxCoeff() < 1e-12);

  const std::size_t m = 20000;
  double lag1 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    RngStream rng(64, i);
    const Eigen::VectorXd x = circulant_sample(sp, 33, rng);
    lag1 += x.head(32).dot(x.tail(32)) / 32.0;
  }
  CHECK(std::abs(lag1 / m) < 4.0 / std::sqrt(32.0 * m));
}

TEST_CASE("fgn synthesis reproduces its autocovariance in both halves") {
  const std::size_t n = 64, m = 100000;
  const StationaryACF<double> acf(AcfKind::fgn, 0.8, n);
  const auto sp = circulant_spectrum(acf, n, EmbeddingPolicy::fixed());
  Eigen::MatrixXd re(m, 5), im(m, 5);
  for (std::size_t i = 0; i < m; ++i) {
    RngStream rng(65, i);
    auto [a, b] = circulant_sample_pair(sp, n, rng);
    re.row(static_cast<Eigen::Index>(i)) = a.segment(10, 5).transpose();
    im.row(static_cast<Eigen::Index>(i)) = b.segment(10, 5).transpose();
  }
  for (const Eigen::MatrixXd* half : {&re, &im}) {
    for (Eigen::Index lag = 0; lag < 5; ++lag) {
      const double c = half->col(0).dot(half->col(lag)) / m;
      const double se = std::sqrt((acf(0) * acf(0) + acf(lag) * acf(lag)) / m);
      CHECK(std::abs(c - acf(lag)) < 4.0 * se);
    }
  }
}

TEST_CASE("davies-harte reference checks") {
  const GridSpec g(64);
  const auto dh = generate_batch(CirculantFbmSampler::davies_harte(g, 0.7), 100000, 66);
  const std::vector<std::pair<std::size_t, std::size_t>> pair{{32, 64}};
  const auto est = empirical_covariance(dh, pair);
  CHECK(std::abs(est[0].value - fbm_cov(0.5, 1.0, 0.7)) <= 4.0 * est[0].standard_error);

  const auto a = generate_batch(CirculantFbmSampler::davies_harte(g, 0.7), 50000, 67);
  const auto b = generate_batch(CholeskySampler(CovarianceKernel<double>::fbm(0.7), g), 50000, 68);
  const Eigen::MatrixXd diff = sample_covariance(a.values()) - sample_covariance(b.values());
  CHECK(diff.cwiseAbs().maxCoeff() <= 0.02);

  const auto half = generate_batch(CirculantFbmSampler::davies_harte(GridSpec(32), 0.5), 20000, 69);
  CHECK(increment_check(half).passed());
}

TEST_CASE("exact fbm samplers match the kernel on a 32-point grid") {
  const GridSpec g(32);
  const auto kernel = CovarianceKernel<double>::fbm(0.35);
  CHECK(covariance_match(generate_batch(CholeskySampler(kernel, g), 50000, 70), kernel).passed());
  CHECK(covariance_match(generate_batch(CirculantFbmSampler::davies_harte(g, 0.35), 50000, 71), kernel).passed());
  CHECK(covariance_match(generate_batch(CirculantFbmSampler(g, 0.35, {}), 50000, 72), kernel).passed());
}

TEST_CASE("moving average at H = 1/2 is brownian motion") {
  const MovingAverageSampler s(GridSpec(8), 0.5, {3.0, 4});
  const Eigen::MatrixXd cov = s.discretized_covariance();
  const Eigen::MatrixXd bm = CovarianceKernel<double>::fbm(0.5).gram(GridSpec(8));
  CHECK((cov - bm).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("moving-average unit variance at the default horizon") {
  const auto b = generate_batch(MovingAverageSampler(GridSpec(16), 0.7, {50.0, 8}), 20000, 73);
  CHECK(std::abs(sample_covariance(b.values())(15, 15) - 1.0) < 0.05);
}

TEST_CASE("moving-average truncation bias in the long-lag increment covariance") {
  // Exact discretized covariances; deviation in units of the M = 2e4 standard error.
  const std::size_t n = 64;
  const double m = 20000.0;
  const double target = fgn_acf<double>(n / 2, n, 0.8);
  const double var = fgn_acf<double>(0, n, 0.8);
  const double se = std::sqrt((var * var + target * target) / m);
  auto deviation = [&](double horizon) {
    const Eigen::MatrixXd c = MovingAverageSampler(GridSpec(n), 0.8, {horizon, 8}).discretized_covariance();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 1; i < n; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = -1.0;
    const Eigen::MatrixXd inc = a * c * a.transpose();
    double mean = 0.0;
    for (std::size_t i = 0; i + n / 2 < n; ++i) mean += inc(static_cast<Eigen::Index>(i + n / 2), static_cast<Eigen::Index>(i));
    return (mean / static_cast<double>(n / 2) - target) / se;
  };
  CHECK(std::abs(deviation(2.0)) > 4.0);
  CHECK(std::abs(deviation(50.0)) < 4.0);
}

TEST_CASE("normalizing constant is stable under tighter quadrature") {
  const double base = normalizing_constant_CH(0.7);
  const double fine = normalizing_constant_CH(0.7, {1e-14, 1e-16, 20000});
  CHECK(std::abs(base - fine) < 1e-8);
}
