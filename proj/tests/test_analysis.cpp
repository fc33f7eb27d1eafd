#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <random>

#include "benthic/analysis.hpp"

using namespace benthic;

namespace {
const RateMeasure kCase1(0.2946, 1.431);
}

TEST_CASE("power-law fit") {
  std::vector<std::pair<double, double>> pts;
  for (int l = 1; l <= 12; ++l) pts.emplace_back(l, 0.092 * std::exp2(-1.06 * l));
  const auto fit = fit_power_law(pts);
  CHECK(fit.c == doctest::Approx(0.092).epsilon(1e-12));
  CHECK(fit.p == doctest::Approx(1.06).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));

  // Scale equivariance: c scales, p is unchanged.
  auto scaled = pts;
  for (auto& [l, er] : scaled) er *= 7.0;
  const auto fit7 = fit_power_law(scaled);
  CHECK(fit7.c == doctest::Approx(7 * 0.092).epsilon(1e-12));
  CHECK(fit7.p == doctest::Approx(fit.p).epsilon(1e-12));

  // Noisy data: R^2 from an independent computation.
  std::mt19937_64 gen(11);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<std::pair<double, double>> noisy;
  std::vector<double> ys;
  for (int l = 1; l <= 12; ++l) {
    const double y = -0.9 * l + noise(gen);
    ys.push_back(y);
    noisy.emplace_back(l, std::exp2(y));
  }
  const auto nf = fit_power_law(noisy);
  double ybar = 0.0;
  for (double y : ys) ybar += y / 12.0;
  double ss_tot = 0.0, ss_res = 0.0;
  for (int l = 1; l <= 12; ++l) {
    const double pred = std::log2(nf.c) - nf.p * l;
    ss_res += (ys[l - 1] - pred) * (ys[l - 1] - pred);
    ss_tot += (ys[l - 1] - ybar) * (ys[l - 1] - ybar);
  }
  CHECK(nf.r_squared == doctest::Approx(1 - ss_res / ss_tot).epsilon(1e-10));

  const std::vector<std::pair<double, double>> one{{1.0, 0.5}};
  CHECK_THROWS_WITH_AS(fit_power_law(one), doctest::Contains("degenerate fit"), std::domain_error);
  const std::vector<std::pair<double, double>> same_l{{2.0, 0.5}, {2.0, 0.25}};
  CHECK_THROWS_AS(fit_power_law(same_l), std::domain_error);
  const std::vector<std::pair<double, double>> zero{{1.0, 0.5}, {2.0, 0.0}};
  CHECK_THROWS_AS(fit_power_law(zero), std::domain_error);
}

TEST_CASE("mean squared gap skips the shared start") {
  Series a{{0, 1, 2}, {5.0, 1.0, 2.0}}, b{{0, 1, 2}, {0.0, 0.0, 0.0}};
  CHECK(mean_squared_gap(a, b) == doctest::Approx(2.5));
  Series c{{0, 1}, {0.0, 0.0}};
  CHECK_THROWS_AS(mean_squared_gap(a, c), std::invalid_argument);
}

TEST_CASE("convergence study plumbing with an injected micro source") {
  SimConfig cfg;
  cfg.dt = 0.024;
  cfg.horizon = 2.4;
  ConvergenceOptions co;
  co.l_min = 1;
  co.l_max = 6;
  co.n_seeds = 3;
  // Offset by 2^(-l/2) so the squared gap is exactly 2^-l.
  co.micro_source = [](int l, std::uint64_t, const QuantileLift&, const Series& macro) {
    Series s = macro;
    for (std::size_t k = 1; k < s.size(); ++k) s.x[k] += std::exp2(-0.5 * l);
    return s;
  };
  const auto rep = convergence_study(kCase1, GrowthSpec::allee(0.0125, 0.25), cfg, co);
  REQUIRE(rep.points.size() == 6);
  for (const auto& p : rep.points) {
    CHECK(p.m == (std::size_t{1} << p.l));
    CHECK(p.er == doctest::Approx(std::exp2(-p.l)).epsilon(1e-9));
    CHECK(p.er_sd == doctest::Approx(0.0).epsilon(1e-12));
  }
  REQUIRE(rep.fit);
  CHECK(rep.fit->p == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.fit->c == doctest::Approx(1.0).epsilon(1e-9));

  co.l_max = 1;
  const auto single = convergence_study(kCase1, GrowthSpec::none(), cfg, co);
  CHECK_FALSE(single.fit);
  CHECK(single.fit_error.find("degenerate fit") != std::string::npos);
  co.n_seeds = 0;
  CHECK_THROWS_AS(convergence_study(kCase1, GrowthSpec::none(), cfg, co), std::domain_error);
}

TEST_CASE("real convergence study shrinks the gap with M") {
  SimConfig cfg;
  cfg.dt = 0.024;
  cfg.horizon = 24.0;
  cfg.seed = 9;
  ConvergenceOptions co;
  co.l_min = 2;
  co.l_max = 9;
  co.n_seeds = 8;
  const auto rep = convergence_study(kCase1, GrowthSpec::none(), cfg, co);
  REQUIRE(rep.fit);
  CHECK(rep.fit->p > 0.7);
  CHECK(rep.fit->p < 1.4);
  for (const auto& p : rep.points) CHECK(p.er > 0.0);
}

TEST_CASE("histogram and modes") {
  const std::vector<std::size_t> counts{5, 1, 0, 2, 1, 7, 7, 3, 4};
  // Ties are not strict maxima; boundary bins count.
  CHECK(find_modes(counts) == std::vector<std::size_t>{0, 3, 8});
  const std::vector<std::size_t> zeros{0, 0, 0};
  CHECK(find_modes(zeros).empty());
  ModeOptions floor;
  floor.min_share = 0.15;
  CHECK(find_modes(counts, floor) == std::vector<std::size_t>{0});

  const std::vector<double> values{0.0, 0.01, 0.019, 0.5, 0.99, 1.0};
  const auto h = make_histogram(values, 50);
  CHECK(h.total() == values.size());
  CHECK(h.bin_edges.size() == 51);
  CHECK(h.bin_edges.front() == 0.0);
  CHECK(h.bin_edges.back() == 1.0);
  CHECK(h.counts[0] == 3);
  CHECK(h.counts[25] == 1);
  CHECK(h.counts[49] == 2);
  REQUIRE(h.modes.size() == 3);
  CHECK(h.modes[0] == doctest::Approx(0.01));
  CHECK(h.modes[1] == doctest::Approx(0.51));
  CHECK(h.modes[2] == doctest::Approx(0.99));
  CHECK_THROWS_AS(make_histogram(values, 1), std::domain_error);
  const std::vector<double> bad{1.5};
  CHECK_THROWS_AS(make_histogram(bad, 10), std::domain_error);
}

TEST_CASE("lattice-normalized modes") {
  // One sample at each k/128: 50 bins hold 2 or 3 attainable values each,
  // so raw counts zigzag while the per-value density is flat.
  std::vector<double> values;
  for (int k = 0; k <= 128; ++k) values.push_back(k / 128.0);
  const auto h = make_histogram(values, 50);
  CHECK(h.total() == 129);
  CHECK(h.modes.size() > 5);
  ModeOptions lattice;
  lattice.lattice = 128;
  CHECK(find_modes(h.counts, lattice).empty());
}

TEST_CASE("tipping classification and bisection") {
  CHECK(classify_terminal(0.5, 0.1) == Fate::Persistent);
  CHECK(classify_terminal(0.1, 0.1) == Fate::Extinct);

  int calls = 0;
  const auto br = bisect_tipping(0.0, 1.0, 1e-6, [&](double x) {
    ++calls;
    return x < 0.3141 ? Fate::Persistent : Fate::Extinct;
  });
  CHECK(br.first < 0.3141);
  CHECK(br.second >= 0.3141);
  CHECK(br.second - br.first <= 1e-6);
  CHECK(calls < 30);
  CHECK_THROWS_AS(bisect_tipping(0.0, 1.0, 1e-3, [](double) { return Fate::Extinct; }), std::invalid_argument);
  CHECK_THROWS_AS(bisect_tipping(1.0, 0.0, 1e-3, [](double) { return Fate::Extinct; }), std::invalid_argument);
}

TEST_CASE("tipping sweep on a coarse lift is monotone in eta") {
  SimConfig cfg;
  cfg.dt = 0.024;
  cfg.horizon = 4800.0;
  const auto spec = GrowthSpec::allee(0.0125, TimeSchedule::sigmoid(0.1, 0.5, 720.0, 48.0));
  TippingOptions to;
  to.nodes = 64;
  const std::vector<double> etas{0.02, 0.004, 0.011, 1.0, 0.007};
  const auto res = tipping_sweep(etas, kCase1, spec, cfg, to);
  REQUIRE(res.points.size() == 5);
  for (std::size_t i = 1; i < res.points.size(); ++i) {
    CHECK(res.points[i].eta > res.points[i - 1].eta);
    if (res.points[i - 1].fate == Fate::Extinct) CHECK(res.points[i].fate == Fate::Extinct);
  }
  CHECK(res.points.front().fate == Fate::Persistent);
  CHECK(res.points.back().fate == Fate::Extinct);
  REQUIRE(res.bracket);
  CHECK(persistence_threshold(spec, to) == 0.1);
}

TEST_CASE("histogram ensemble conserves paths") {
  SimConfig cfg;
  cfg.dt = 0.024;
  cfg.horizon = 48.0;
  cfg.seed = 4;
  const auto h = histogram_ensemble(0.5, 32, 300, 20, kCase1, GrowthSpec::allee(0.0125, 0.25), cfg);
  CHECK(h.total() == 300);
  CHECK(h.counts.size() == 20);
}
