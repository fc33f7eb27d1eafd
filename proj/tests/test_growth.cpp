#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <random>

#include "benthic/growth.hpp"

using namespace benthic;

TEST_CASE("allee growth is r x (1 - x) (x - a)") {
  const auto spec = GrowthSpec::allee(0.0125, 0.25);
  for (double x : {0.0, 0.1, 0.25, 0.6, 1.0}) {
    CHECK(growth_rate(spec, 0.0, x) == doctest::Approx(0.0125 * x * (1 - x) * (x - 0.25)).epsilon(1e-15));
  }
  CHECK(growth_rate(spec, 5.0, 0.25) == 0.0);
  CHECK(growth_rate(spec, 5.0, 0.2) < 0.0);
  CHECK(growth_rate(spec, 5.0, 0.3) > 0.0);
  CHECK(spec.g_plus(0.4) == doctest::Approx(0.4));
  CHECK(spec.g_minus(3.0, 0.4) == doctest::Approx(0.25));
  CHECK_THROWS_AS(growth_rate(spec, 0.0, 1.2), std::domain_error);
}

TEST_CASE("logistic growth and its closed form") {
  const auto spec = GrowthSpec::logistic(1.0);
  CHECK(spec.g_plus(0.3) == 1.0);
  CHECK(spec.g_minus(0.0, 0.3) == 0.0);
  CHECK(growth_rate(spec, 0.0, 0.5) == doctest::Approx(0.25));
  CHECK(logistic_closed_form(0.5, 1.0, std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-14));

  // Fourth-order Runge-Kutta on dx/dt = x (1 - x).
  double x = 0.2;
  const double h = 1e-3;
  for (int k = 0; k < 2000; ++k) {
    auto f = [](double y) { return y * (1 - y); };
    const double k1 = f(x), k2 = f(x + h / 2 * k1), k3 = f(x + h / 2 * k2), k4 = f(x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK(logistic_closed_form(0.2, 1.0, 2.0) == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("intensities carry r") {
  const auto spec = GrowthSpec::allee(0.5, 0.25);
  CHECK(spec.up_intensity(0.4) == doctest::Approx(0.5 * 0.4 * 0.4));
  CHECK(spec.down_intensity(0.0, 0.4) == doctest::Approx(0.5 * 0.6 * 0.25));
  // G = up (1 - x) - down x reproduces the growth law.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 100; ++n) {
    const double x = u(gen);
    CHECK(spec.up_intensity(x) * (1 - x) - spec.down_intensity(0.0, x) * x ==
          doctest::Approx(growth_rate(spec, 0.0, x)).epsilon(1e-12));
  }
  CHECK(GrowthSpec::none().up_intensity(0.7) == 0.0);
  CHECK(GrowthSpec::none().down_intensity(0.0, 0.7) == 0.0);
}

TEST_CASE("sigmoid threshold schedule") {
  const double h = 720.0, theta = 48.0;
  const auto s = TimeSchedule::sigmoid(0.1, 0.5, h, theta);
  CHECK(s.at(h) == doctest::Approx(0.3));
  CHECK(s.at(0.0) == doctest::Approx(0.5 - 0.2 * (1 + std::tanh(-h / theta))).epsilon(1e-14));
  CHECK(s.at(0.0) > 0.4999);
  CHECK(s.at(4800.0) == doctest::Approx(0.1).epsilon(1e-9));
  for (double t = 0.0; t < 4800.0; t += 37.0) CHECK(s.at(t + 37.0) <= s.at(t));

  const auto rising = TimeSchedule::sigmoid(0.1, 0.5, h, theta, ScheduleDirection::AsPrinted);
  CHECK(rising.at(0.0) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(rising.at(4800.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rising.at(100.0) == doctest::Approx(0.1 + 0.2 * (1 + std::tanh((100.0 - h) / theta))).epsilon(1e-14));

  CHECK(TimeSchedule::constant(0.25).at(123.0) == 0.25);
  CHECK(a_at(s, h) == doctest::Approx(0.3));
  CHECK_THROWS_AS(TimeSchedule::sigmoid(0.5, 0.1, h, theta), std::domain_error);
  CHECK_THROWS_AS(TimeSchedule::sigmoid(0.1, 0.5, h, 0.0), std::domain_error);
  CHECK_THROWS_AS(TimeSchedule::constant(1.5), std::domain_error);
  CHECK_THROWS_AS(GrowthSpec::logistic(-1.0), std::domain_error);
}
