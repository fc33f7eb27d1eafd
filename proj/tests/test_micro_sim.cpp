#include "doctest.h"

#include <stdexcept>
#include <array>
#include <cmath>
#include <numeric>

#include "benthic/micro_sim.hpp"

using namespace benthic;

namespace {

const RateMeasure kCase1(0.2946, 1.431);

SimConfig config(double dt, double horizon, std::uint64_t seed = 1) {
  SimConfig c;
  c.dt = dt;
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

// Exact law of the configuration after K steps for a tiny system: the
// transition matrix is built from the per-site flip probabilities directly.
std::vector<double> exact_configuration_law(const QuantileLift& lift, const GrowthSpec& spec, double dt, int steps) {
  const std::size_t m = lift.m();
  const std::size_t n = std::size_t{1} << m;
  std::vector<double> law(n, 0.0);
  law[n - 1] = 1.0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    std::vector<double> next(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      if (law[s] == 0.0) continue;
      const double x = static_cast<double>(__builtin_popcountll(s)) / static_cast<double>(m);
      const double up = 1.0 - std::exp(-spec.r() * x * spec.g_plus(x) * dt);
      for (std::size_t s2 = 0; s2 < n; ++s2) {
        double p = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
          const bool was = (s >> i) & 1u, now = (s2 >> i) & 1u;
          if (!was) {
            p *= now ? up : 1.0 - up;
          } else {
            const double down = 1.0 - std::exp(-(spec.r() * (1 - x) * spec.g_minus(t, x) + lift[i]) * dt);
            p *= now ? 1.0 - down : down;
          }
        }
        next[s2] += law[s] * p;
      }
    }
    law = next;
  }
  return law;
}

std::vector<double> empirical_configuration_law(const QuantileLift& lift, const GrowthSpec& spec, double dt,
                                                int steps, int paths, MicroEngine engine, std::uint64_t master) {
  std::vector<double> counts(std::size_t{1} << lift.m(), 0.0);
  for (int p = 0; p < paths; ++p) {
    std::size_t code = 0;
    PathOptions po;
    po.engine = engine;
    po.record_every = static_cast<std::size_t>(steps);
    po.site_observer = [&](double, std::span<const std::uint8_t> bits) {
      code = 0;
      for (std::size_t i = 0; i < bits.size(); ++i) code |= std::size_t{bits[i]} << i;
    };
    simulate_path(all_ones(lift.m()), lift, spec, config(dt, dt * steps, path_seed(master, p)), po);
    counts[code] += 1.0;
  }
  return counts;
}

double chi_square(const std::vector<double>& counts, const std::vector<double>& law, int paths) {
  double chi = 0.0;
  for (std::size_t s = 0; s < law.size(); ++s) {
    const double e = law[s] * paths;
    if (e > 0.0) chi += (counts[s] - e) * (counts[s] - e) / e;
  }
  return chi;
}

}  // namespace

TEST_CASE("flip probabilities") {
  CHECK(flip_probability(2.0, 0.1, FlipRule::Exponential) == doctest::Approx(1 - std::exp(-0.2)).epsilon(1e-15));
  CHECK(flip_probability(2.0, 0.1, FlipRule::Linear) == doctest::Approx(0.2));
  CHECK(flip_probability(20.0, 0.1, FlipRule::Linear) == 1.0);
  CHECK(flip_probability(0.0, 0.1, FlipRule::Exponential) == 0.0);
}

TEST_CASE("zero steps leave the all-ones state") {
  const auto lift = build_quantile_lift(kCase1, 4);
  const auto s = simulate_path(all_ones(4), lift, GrowthSpec::allee(0.0125, 0.25), config(0.024, 0.0, 7));
  REQUIRE(s.size() == 1);
  CHECK(s.t[0] == 0.0);
  CHECK(s.x[0] == 1.0);
}

TEST_CASE("literal step: certain flips") {
  auto lift = std::make_shared<QuantileLift>(std::vector<double>{1e9, 1e9});
  MicroState state({1, 1}, lift, 3);
  advance_micro(state, GrowthSpec::none(), 1.0);
  CHECK(state.ones() == 0);
  CHECK(state.t == 1.0);
  // Extinction is absorbing: no up-flips without occupants.
  auto slow = std::make_shared<QuantileLift>(std::vector<double>{0.0, 0.0});
  MicroState empty({0, 0}, slow, 3);
  for (int k = 0; k < 100; ++k) advance_micro(empty, GrowthSpec::logistic(50.0), 0.1);
  CHECK(empty.ones() == 0);
  CHECK_THROWS_AS(MicroState({1, 2}, slow, 1), std::invalid_argument);
  CHECK_THROWS_AS(MicroState({1}, slow, 1), std::invalid_argument);
}

TEST_CASE("both engines match the exact law of a three-site system") {
  const QuantileLift lift({0.1, 0.4, 1.5});
  const auto spec = GrowthSpec::allee(3.0, 0.25);
  const double dt = 0.05;
  const int steps = 16, paths = 40000;
  const auto law = exact_configuration_law(lift, spec, dt, steps);
  CHECK(std::accumulate(law.begin(), law.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // df = 7; the 1e-4 upper quantile of chi-square(7) is about 29.9.
  for (auto engine : {MicroEngine::PerSite, MicroEngine::EventSkipping}) {
    const auto counts = empirical_configuration_law(lift, spec, dt, steps, paths, engine, 99);
    CHECK(chi_square(counts, law, paths) < 29.9);
  }
}

TEST_CASE("engines agree on a time-varying threshold") {
  const auto lift = build_quantile_lift(kCase1.with_eta(0.01), 64);
  const auto spec = GrowthSpec::allee(0.5, TimeSchedule::sigmoid(0.1, 0.5, 5.0, 1.0));
  const auto c = config(0.05, 12.0, 5);
  EnsembleOptions a, b;
  a.engine = MicroEngine::PerSite;
  b.engine = MicroEngine::EventSkipping;
  a.summary_every = b.summary_every = 40;
  const auto ra = ensemble(all_ones(64), lift, spec, c, 3000, a);
  auto cb = c;
  cb.seed = 6;
  const auto rb = ensemble(all_ones(64), lift, spec, cb, 3000, b);
  REQUIRE(ra.mean.size() == rb.mean.size());
  for (std::size_t k = 0; k < ra.mean.size(); ++k) {
    const double se = std::sqrt((ra.variance[k] + rb.variance[k]) / 3000.0);
    CHECK(std::abs(ra.mean[k] - rb.mean[k]) <= 4.5 * se + 1e-12);
  }
}

TEST_CASE("decay-only ensemble statistics") {
  const auto lift = build_quantile_lift(kCase1, 16);
  const double t = 1.0;
  double mean = 0.0, var = 0.0;
  for (double r : lift.rates()) {
    const double p = std::exp(-r * t);
    mean += p / 16.0;
    var += p * (1 - p) / 256.0;
  }
  const auto mv = decay_mean_variance(lift, t);
  CHECK(mv.mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(mv.variance == doctest::Approx(var).epsilon(1e-14));

  for (auto engine : {MicroEngine::PerSite, MicroEngine::EventSkipping}) {
    EnsembleOptions eo;
    eo.engine = engine;
    eo.summary_every = 1000;
    const auto res = ensemble(all_ones(16), lift, GrowthSpec::none(), config(0.001, t, 21), 20000, eo);
    CHECK(std::abs(res.mean.back() - mean) <= 4.0 * std::sqrt(var / 20000.0));
    CHECK(res.variance.back() == doctest::Approx(var).epsilon(0.05));
  }
}

TEST_CASE("seeding and worker independence") {
  const auto lift = build_quantile_lift(kCase1, 32);
  const auto spec = GrowthSpec::allee(0.0125, 0.25);
  const auto c = config(0.024, 24.0, 42);
  for (auto engine : {MicroEngine::PerSite, MicroEngine::EventSkipping}) {
    PathOptions po;
    po.engine = engine;
    const auto s1 = simulate_path(all_ones(32), lift, spec, c, po);
    const auto s2 = simulate_path(all_ones(32), lift, spec, c, po);
    CHECK(s1.x == s2.x);
    auto c2 = c;
    c2.seed = 43;
    CHECK(simulate_path(all_ones(32), lift, spec, c2, po).x != s1.x);

    EnsembleOptions one, many;
    one.engine = many.engine = engine;
    one.workers = 1;
    many.workers = 3;
    const auto e1 = ensemble(all_ones(32), lift, spec, c, 37, one);
    const auto e3 = ensemble(all_ones(32), lift, spec, c, 37, many);
    CHECK(e1.terminal == e3.terminal);
    CHECK(e1.mean == e3.mean);
    CHECK(e1.variance == e3.variance);
    CHECK(e1.seed == 42);
    CHECK(e1.n_paths == 37);
  }
  CHECK(path_seed(1, 0) != path_seed(1, 1));
  CHECK(path_seed(1, 0) != path_seed(2, 0));
}

TEST_CASE("recorded series") {
  const auto lift = build_quantile_lift(kCase1, 8);
  PathOptions po;
  po.record_every = 3;
  bool bits_ok = true;
  std::size_t calls = 0;
  po.site_observer = [&](double, std::span<const std::uint8_t> bits) {
    ++calls;
    for (auto b : bits) bits_ok = bits_ok && b <= 1;
  };
  const auto s = simulate_path(all_ones(8), lift, GrowthSpec::allee(0.5, 0.25), config(0.1, 1.0), po);
  // Steps 0, 3, 6, 9 and the final step 10.
  REQUIRE(s.size() == 5);
  CHECK(calls == 5);
  CHECK(bits_ok);
  CHECK(s.t[1] == doctest::Approx(0.3));
  CHECK(s.t.back() == doctest::Approx(1.0));
  for (double x : s.x) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
    CHECK(std::abs(x * 8 - std::round(x * 8)) < 1e-12);
  }
}

TEST_CASE("configuration validation") {
  const auto lift = build_quantile_lift(kCase1, 4);
  CHECK_THROWS_AS(simulate_path(all_ones(4), lift, GrowthSpec::none(), config(0.0, 1.0)), std::domain_error);
  CHECK_THROWS_AS(simulate_path(all_ones(4), lift, GrowthSpec::none(), config(0.1, -1.0)), std::domain_error);
  CHECK_THROWS_AS(simulate_path(all_ones(3), lift, GrowthSpec::none(), config(0.1, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(ensemble(all_ones(4), lift, GrowthSpec::none(), config(0.1, 1.0), 0), std::domain_error);
}
