#include <doctest.h>

#include <cmath>
#include <vector>

#include "selfsim/errors.hpp"
#include "selfsim/lamperti.hpp"
#include "selfsim/verify.hpp"

using namespace selfsim;

TEST_CASE("grid map against exact floors") {
  const auto m10 = grid_map(10);
  CHECK(m10.index == std::vector<std::size_t>{0, 3, 4, 6, 6, 7, 8, 9, 9, 10});
  CHECK(m10.residual(2) == doctest::Approx(0.7712125471966244).epsilon(1e-12));
  CHECK(m10.residual(6) == doctest::Approx(0.4509804001425683).epsilon(1e-12));

  const auto m16 = grid_map(16);
  CHECK(m16.index == std::vector<std::size_t>{0, 4, 6, 8, 9, 10, 11, 12, 12, 13, 13, 14, 14, 15, 15, 16});
  // j = 2, 4, 8 hit the lattice exactly and must not fall one step short.
  CHECK(m16.residual(1) == doctest::Approx(0.0));
  CHECK(m16.residual(3) == doctest::Approx(0.0));
  CHECK(m16.residual(2) == doctest::Approx(0.33985000288462475).epsilon(1e-12));
}

TEST_CASE("grid map invariants") {
  for (std::size_t n : {2u, 3u, 64u, 1000u, 4096u}) {
    const auto m = grid_map(n);
    CHECK(m.index.front() == 0);
    CHECK(m.index.back() == n);
    for (std::size_t j = 1; j <= n; ++j) {
      const double theta = m.residual(static_cast<Eigen::Index>(j - 1));
      CHECK(theta >= 0.0);
      CHECK(theta < 1.0);
      if (j > 1) CHECK(m.index[j - 1] >= m.index[j - 2]);
    }
  }
  CHECK_THROWS_AS(grid_map(1), DomainError);
}

TEST_CASE("target variance") {
  CHECK(target_variance(Process::fbm, 0.3, 0.25) == doctest::Approx(std::pow(0.25, 0.6)));
  CHECK(target_variance(Process::sfbm, 0.7, 0.5) == doctest::Approx(0.25785828325519904).epsilon(1e-14));
  CHECK(target_variance(Process::bm, 0.9, 0.4) == 0.4);
  CHECK_THROWS_AS(target_variance(Process::fbm, 1.2, 0.4), DomainError);
}

TEST_CASE("transform scales the mapped stationary value") {
  const LampertiSampler s(Process::fbm, 0.6, GridSpec(10));
  const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(11, 0.0, 10.0);
  const Eigen::VectorXd x = s.transform(u);
  for (std::size_t j = 1; j <= 10; ++j)
    CHECK(x(static_cast<Eigen::Index>(j - 1)) ==
          doctest::Approx(std::pow(j / 10.0, 0.6) * static_cast<double>(s.map().index[j - 1])));
  CHECK_THROWS_AS(s.transform(Eigen::VectorXd::Zero(10)), UsageError);

  RngStream a(4, 4), b(4, 4);
  CHECK(s.draw(a) == s.transform(s.draw_stationary(b)));
}

TEST_CASE("sampler info and embedding") {
  const LampertiSampler s(Process::sfbm, 0.4, GridSpec(64));
  const auto info = s.info();
  CHECK(info.method == Method::lamperti);
  CHECK(info.process == Process::sfbm);
  CHECK(info.diagnostics.embedding_size == s.spectrum().m);
  CHECK(s.spectrum().m >= 128);
  CHECK(s.spectrum().m % 128 == 0);

  const LampertiSampler bm(Process::bm, 0.9, GridSpec(8));
  CHECK(bm.info().process == Process::fbm);
  CHECK(bm.info().hurst == 0.5);

  CHECK_THROWS_AS(LampertiSampler(Process::fbm, 0.99, GridSpec(8)), EmbeddingFailure);
  CHECK_THROWS_AS(LampertiSampler(Process::fbm, 0.5, GridSpec(1)), DomainError);
}

TEST_CASE("stationary sequence covariance") {
  const std::size_t n = 32, m = 20000;
  const LampertiSampler s(Process::sfbm, 0.7, GridSpec(n));
  const auto acf = StationaryACF<double>::lamperti(Process::sfbm, 0.7, n);
  Eigen::MatrixXd u(m, n + 1);
  for (std::size_t i = 0; i < m; ++i) {
    RngStream rng(31, i);
    u.row(static_cast<Eigen::Index>(i)) = s.draw_stationary(rng).transpose();
  }
  for (std::size_t k : {0u, 1u, 5u, 20u, 32u}) {
    const double c = u.col(0).dot(u.col(static_cast<Eigen::Index>(k))) / m;
    const double se = std::sqrt((acf(0) * acf(0) + acf(k) * acf(k)) / m);
    CHECK_MESSAGE(std::abs(c - acf(k)) < 4.0 * se, "lag " << k);
  }
}

TEST_CASE("marginal variance profile") {
  for (auto p : {Process::fbm, Process::sfbm}) {
    const LampertiSampler s(p, 0.7, GridSpec(64));
    const auto batch = generate_batch(s, 20000, 17);
    const auto profile = marginal_variance_profile(batch, p, 0.7);
    REQUIRE(profile.size() == 64);
    for (const auto& node : {profile[15], profile[31], profile[63]}) {
      CHECK(node.theoretical == doctest::Approx(target_variance(p, 0.7, node.t)));
      CHECK(node.standard_error == doctest::Approx(node.theoretical * std::sqrt(2.0 / 20000)));
      CHECK(node.deviation < 4.0);
    }
  }
  RngStream rng(1, 0);
  const auto path = simulate_lamperti(Process::fbm, 0.3, GridSpec(16), rng);
  CHECK(path.values.size() == 16);
  CHECK(path.method == Method::lamperti);
}

TEST_CASE("error bound diagnostics on the dyadic ladder") {
  const std::vector<std::size_t> sizes{16384, 256, 4096, 1024};
  const auto r = error_bound_diagnostics(sizes, 0.5);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows.front().n == 256);
  CHECK(r.beta == doctest::Approx(0.49));
  CHECK(r.decreasing);
  CHECK(r.within_limits);
  CHECK(r.pass);
  double c1 = 0.0;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    const double nn = static_cast<double>(row.n);
    CHECK(row.a_scaled == doctest::Approx(row.a * nn / std::log(nn)));
    CHECK(row.a_scaled <= r.c1);
    CHECK(row.a <= row.b);
    if (i > 0) CHECK(row.a < r.rows[i - 1].a);
    c1 = std::max(c1, row.a_scaled);
  }
  CHECK(r.c1 == c1);
}

TEST_CASE("error bound diagnostics negative controls") {
  const std::vector<std::size_t> repeated{1024, 1024};
  const auto r = error_bound_diagnostics(repeated, 0.5);
  CHECK(!r.decreasing);
  CHECK(!r.pass);
  CHECK_THROWS_AS(error_bound_diagnostics(std::vector<std::size_t>{}, 0.5), UsageError);
  CHECK_THROWS_AS(error_bound_diagnostics(std::vector<std::size_t>{256}, 1.0), DomainError);
}

TEST_CASE("grid map dyadic case and exp-grid consistency") {
  const auto m4 = grid_map(4);
  CHECK(m4.index[1] == 2);
  CHECK(m4.residual(1) == 0.0);
  for (std::size_t n : {7u, 64u, 1000u, 16384u}) {
    const auto m = grid_map(n);
    const double nn = static_cast<double>(n);
    double worst = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double g = static_cast<double>(m.index[j - 1]);
      const double theta = m.residual(static_cast<Eigen::Index>(j - 1));
      const double back = std::pow(nn, g / nn - 1.0) * std::pow(nn, theta / nn);
      const double t = static_cast<double>(j) / nn;
      worst = std::max(worst, std::abs(back - t) / t);
    }
    CHECK_MESSAGE(worst < 1e-12, "n=" << n);
  }
}

TEST_CASE("marginal variance reference values") {
  const std::size_t n = 64, m = 20000;
  auto var_at = [&](Process p, double h, std::size_t j, std::uint64_t seed) {
    const auto b = generate_batch(LampertiSampler(p, h, GridSpec(n)), m, seed);
    return marginal_variance_profile(b, p, h)[j - 1];
  };
  const auto a = var_at(Process::fbm, 0.7, n, 81);
  CHECK(a.theoretical == 1.0);
  CHECK(a.deviation < 4.0);
  const auto b = var_at(Process::sfbm, 0.7, n, 82);
  CHECK(b.theoretical == doctest::Approx(0.680492).epsilon(1e-6));
  CHECK(b.deviation < 4.0);
  const auto c = var_at(Process::fbm, 0.5, n / 2, 83);
  CHECK(c.theoretical == doctest::Approx(0.5));
  CHECK(c.deviation < 4.0);
  const auto d = var_at(Process::fbm, 0.2, n / 4, 84);
  CHECK(d.theoretical == doctest::Approx(0.574349).epsilon(1e-6));
  CHECK(d.deviation < 4.0);
  const auto e = var_at(Process::sfbm, 0.8, n, 85);
  CHECK(e.theoretical == doctest::Approx(2.0 - std::pow(2.0, 0.6)));
  CHECK(e.deviation < 4.0);

  RngStream x(9, 9), y(9, 9);
  CHECK(simulate_lamperti(Process::sfbm, 0.3, GridSpec(n), x).values ==
        simulate_lamperti(Process::sfbm, 0.3, GridSpec(n), y).values);
}

TEST_CASE("error-bound rate confirmation") {
  const std::vector<std::size_t> sizes{256, 1024, 4096, 16384};
  for (double h : {0.2, 0.5, 0.9}) {
    const auto r = error_bound_diagnostics(sizes, h);
    const double ratio = r.rows.back().a / r.rows.front().a;
    const double rate = (std::log(16384.0) / 16384.0) / (std::log(256.0) / 256.0);
    CHECK(ratio < 1.5 * rate);
    CHECK(r.pass);
  }
}

TEST_CASE("scaling law of the one-dimensional marginals") {
  const std::size_t n = 64;
  const auto b = generate_batch(LampertiSampler(Process::fbm, 0.7, GridSpec(n)), 20000, 86);
  CHECK(scaling_quantile_check(b, n / 2, 0.7).passed());
  CHECK(scaling_quantile_check(b, n / 4, 0.7).passed());
}

TEST_CASE("floor map repeats indices so neighbouring nodes share a stationary value") {
  // Structural reason the transformed path cannot have Brownian increments:
  // X(j/n) and X((j+1)/n) reuse U(g) whenever g(j) = g(j+1).
  const auto m = grid_map(256);
  std::size_t repeats = 0;
  for (std::size_t j = 1; j < 256; ++j) repeats += m.index[j] == m.index[j - 1];
  CHECK(repeats > 0);
}
