#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <random>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "benthic/rate_measure.hpp"

using namespace benthic;

namespace {

const RateMeasure kCase1(0.2946, 1.431);
const RateMeasure kCase2(0.2103, 0.8881);

double oracle_cdf(const RateMeasure& m, double r) { return boost::math::gamma_p(m.alpha(), r / m.scale()); }

double oracle_quantile(const RateMeasure& m, double p) {
  double lo = 0.0, hi = 1.0;
  while (oracle_cdf(m, hi) < p) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle_cdf(m, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("regularized incomplete gamma agrees with an independent implementation") {
  for (double a : {0.05, 0.2103, 0.2946, 1.0, 2.5, 10.0, 80.0}) {
    for (double x : {1e-8, 1e-3, 0.1, 0.9, 1.0, 3.0, 11.0, 50.0, 120.0}) {
      const double p = boost::math::gamma_p(a, x);
      const double q = boost::math::gamma_q(a, x);
      CHECK(regularized_gamma_p(a, x) == doctest::Approx(p).epsilon(1e-11));
      CHECK(regularized_gamma_q(a, x) == doctest::Approx(q).epsilon(1e-10));
    }
  }
  CHECK(regularized_gamma_p(0.3, 0.0) == 0.0);
}

TEST_CASE("density and cdf") {
  for (const auto& m : {kCase1, kCase2, RateMeasure(2.0, 0.5, 3.0)}) {
    const boost::math::gamma_distribution<double> ref(m.alpha(), m.scale());
    for (double r : {1e-6, 0.01, 0.3, 1.0, 4.0, 20.0}) {
      CHECK(density(m, r) == doctest::Approx(boost::math::pdf(ref, r)).epsilon(1e-11));
      CHECK(cdf(m, r) == doctest::Approx(boost::math::cdf(ref, r)).epsilon(1e-11));
    }
  }
  CHECK(cdf(kCase1, 0.0) == 0.0);
  CHECK_THROWS_AS(density(kCase1, 0.0), std::domain_error);
  CHECK_THROWS_AS(cdf(kCase1, -1.0), std::domain_error);
}

TEST_CASE("quantile inverts the cdf") {
  for (const auto& m : {kCase1, kCase2}) {
    for (double p : {1e-9, 1e-4, 0.01, 0.25, 0.5, 0.75, 0.99, 1 - 1e-9}) {
      const double q = quantile(m, p);
      CHECK(q == doctest::Approx(oracle_quantile(m, p)).epsilon(1e-9));
      CHECK(oracle_cdf(m, q) == doctest::Approx(p).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(quantile(kCase1, 0.0), std::domain_error);
  CHECK_THROWS_AS(quantile(kCase1, 1.0), std::domain_error);
}

TEST_CASE("quantile round trip on random measures") {
  std::mt19937_64 gen(20240511);
  std::uniform_real_distribution<double> shape(0.1, 4.0), scale(0.05, 5.0), prob(1e-6, 1 - 1e-6);
  for (int n = 0; n < 200; ++n) {
    const RateMeasure m(shape(gen), scale(gen));
    const double p = prob(gen);
    CHECK(cdf(m, quantile(m, p)) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("laplace transform is the closed-form long-memory curve") {
  for (double t : {0.0, 0.5, 1.0, 6.0, 100.0}) {
    CHECK(laplace_transform(kCase1, t) == doctest::Approx(std::pow(1.0 + 1.431 * t, -0.2946)).epsilon(1e-14));
  }
  const RateMeasure scaled(0.2946, 1.431, 0.01);
  CHECK(laplace_transform(scaled, 2.0) == doctest::Approx(std::pow(1.0 + 0.01431 * 2.0, -0.2946)));
}

TEST_CASE("measure integrator reproduces known moments") {
  for (const auto& m : {kCase1, kCase2, RateMeasure(3.0, 0.2)}) {
    const double a = m.alpha(), b = m.scale();
    // Truncating at the 1 - 1e-9 quantile cuts a little of the tail mass.
    CHECK(expectation(m, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(2e-9));
    CHECK(expectation(m, [](double r) { return r; }) == doctest::Approx(a * b).epsilon(1e-7));
    const double half = std::sqrt(b) * std::tgamma(a + 0.5) / std::tgamma(a);
    CHECK(expectation(m, [](double r) { return std::sqrt(r); }) == doctest::Approx(half).epsilon(1e-8));
    for (double t : {0.5, 3.0, 6.0}) {
      CHECK(std::abs(expectation(m, [t](double r) { return std::exp(-r * t); }) - laplace_transform(m, t)) < 1e-8);
    }
  }
}

TEST_CASE("quantile lift places atoms at mid quantiles") {
  for (std::size_t m : {1u, 2u, 7u, 64u}) {
    const auto lift = build_quantile_lift(kCase1, m);
    REQUIRE(lift.m() == m);
    for (std::size_t i = 0; i < m; ++i) {
      const double p = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(m));
      CHECK(lift[i] == doctest::Approx(oracle_quantile(kCase1, p)).epsilon(1e-9));
      if (i > 0) CHECK(lift[i] > lift[i - 1]);
    }
  }
  CHECK_THROWS_AS(build_quantile_lift(kCase1, 0), std::domain_error);
  CHECK_THROWS_AS(QuantileLift({}), std::domain_error);
  CHECK_THROWS_AS(QuantileLift({0.2, 0.1}), std::domain_error);
  CHECK_THROWS_AS(QuantileLift({-1.0}), std::domain_error);
  CHECK_NOTHROW(QuantileLift({0.0, 0.0, 0.0}));
}

TEST_CASE("cdf gap of the lift is half an atom") {
  for (const auto& measure : {kCase1, kCase2}) {
    for (std::size_t m = 1; m <= 1024; m *= 2) {
      const auto lift = build_quantile_lift(measure, m);
      // Dense independent scan: the mixture F jumps by 1/M at each atom.
      double worst = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double f = oracle_cdf(measure, lift[i]);
        worst = std::max({worst, std::abs(f - static_cast<double>(i) / m), std::abs(f - static_cast<double>(i + 1) / m)});
      }
      const double gap = cdf_gap(lift, measure, 20000);
      CHECK(gap == doctest::Approx(worst).epsilon(1e-8));
      CHECK(gap == doctest::Approx(0.5 / static_cast<double>(m)).epsilon(1e-7));
      CHECK(gap <= 1.0 / static_cast<double>(m));
    }
  }
}

TEST_CASE("total variation distance") {
  CHECK(tv_distance(kCase1, kCase1) == doctest::Approx(0.0).epsilon(1e-9));
  // Same shape, different scale: densities cross once at R*.
  for (double a : {0.2946, 1.0, 2.5}) {
    const RateMeasure p(a, 1.0), q(a, 2.0);
    const double r_star = a * std::log(2.0) / (1.0 - 0.5);
    const double expect = boost::math::gamma_p(a, r_star) - boost::math::gamma_p(a, r_star / 2.0);
    CHECK(tv_distance(p, q) == doctest::Approx(expect).epsilon(1e-6));
    CHECK(tv_distance(q, p) == doctest::Approx(tv_distance(p, q)).epsilon(1e-9));
  }
  // Different shapes: log-grid midpoint sum of |f - g| / 2.
  const RateMeasure p(0.2946, 1.431), q(0.35, 1.2);
  double sum = 0.0;
  const int n = 400000;
  const double lo = std::log(1e-30), hi = std::log(200.0), h = (hi - lo) / n;
  for (int i = 0; i < n; ++i) {
    const double r = std::exp(lo + (i + 0.5) * h);
    sum += std::abs(density(p, r) - density(q, r)) * r * h;
  }
  CHECK(tv_distance(p, q) == doctest::Approx(0.5 * sum).epsilon(1e-4));
  const double tv = tv_distance(p, q);
  CHECK(tv >= 0.0);
  CHECK(tv <= 1.0);
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(RateMeasure(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(RateMeasure(1.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(RateMeasure(1.0, 1.0, 0.0), std::domain_error);
  CHECK(kCase1.with_eta(0.5).scale() == doctest::Approx(0.7155));
  CHECK(kCase1.mean() == doctest::Approx(0.2946 * 1.431));
}
