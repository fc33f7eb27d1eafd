#include "benthic/micro_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <thread>

namespace benthic {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::domain_error("SimConfig: dt must be positive");
  // A zero horizon is accepted and means "no steps".
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::domain_error("SimConfig: horizon must be nonnegative");
  if (horizon > 0.0 && horizon < dt * (1.0 - 1e-9)) throw std::domain_error("SimConfig: horizon must be at least dt");
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(horizon / dt)); }

double flip_probability(double hazard, double dt, FlipRule rule) {
  if (!(hazard > 0.0)) return 0.0;
  if (rule == FlipRule::Linear) return std::min(1.0, hazard * dt);
  return -std::expm1(-hazard * dt);
}

MicroState::MicroState(std::vector<std::uint8_t> b, std::shared_ptr<const QuantileLift> l, std::uint64_t seed,
                       double time)
    : t(time), bits(std::move(b)), lift(std::move(l)), rng(seed) {
  if (!lift) throw std::invalid_argument("MicroState: lift required");
  if (bits.size() != lift->m()) throw std::invalid_argument("MicroState: bits length must equal lift size");
  for (auto bit : bits) {
    if (bit > 1) throw std::invalid_argument("MicroState: bits must be 0 or 1");
  }
}

std::size_t MicroState::ones() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double aggregate(const MicroState& state) {
  return static_cast<double>(state.ones()) / static_cast<double>(state.bits.size());
}

void advance_micro(MicroState& state, const GrowthSpec& spec, double dt, FlipRule rule) {
  if (!(dt > 0.0)) throw std::domain_error("step_micro: dt must be positive");
  const double x = aggregate(state);
  const double p_up = flip_probability(spec.up_intensity(x), dt, rule);
  const double growth_down = spec.down_intensity(state.t, x);
  const auto rates = state.lift->rates();
  for (std::size_t i = 0; i < state.bits.size(); ++i) {
    const double u = uniform01(state.rng);
    if (state.bits[i] == 0) {
      if (u < p_up) state.bits[i] = 1;
    } else if (u < flip_probability(growth_down + rates[i], dt, rule)) {
      state.bits[i] = 0;
    }
  }
  state.t += dt;
}

MicroState step_micro(MicroState state, const GrowthSpec& spec, double dt, FlipRule rule) {
  advance_micro(state, spec, dt, rule);
  return state;
}

std::vector<std::uint8_t> all_ones(std::size_t m) { return std::vector<std::uint8_t>(m, 1); }

namespace {

__extension__ using u128 = unsigned __int128;

void validate_initial(std::span<const std::uint8_t> initial, const QuantileLift& lift) {
  if (initial.size() != lift.m()) throw std::invalid_argument("initial configuration length must equal lift size");
  for (auto bit : initial) {
    if (bit > 1) throw std::invalid_argument("initial configuration must contain only 0 and 1");
  }
}

class PerSiteEngine {
 public:
  PerSiteEngine(std::span<const std::uint8_t> initial, const QuantileLift& lift, const GrowthSpec& spec,
                const SimConfig& config, std::uint64_t seed)
      : state_(std::vector<std::uint8_t>(initial.begin(), initial.end()), std::make_shared<QuantileLift>(lift), seed),
        spec_(spec),
        config_(config) {}

  void step() {
    advance_micro(state_, spec_, config_.dt, config_.flip_rule);
    ++k_;
    state_.t = static_cast<double>(k_) * config_.dt;
  }
  std::size_t ones() const { return state_.ones(); }
  std::span<const std::uint8_t> bits() const { return state_.bits; }

 private:
  MicroState state_;
  const GrowthSpec& spec_;
  const SimConfig& config_;
  std::uint64_t k_ = 0;
};

// Equivalent in law to PerSiteEngine under the exponential flip rule: the
// up-flips among 0-sites and the growth-driven down-flips among 1-sites are
// drawn with geometric skips, and each site's decay channel is an
// independent Bernoulli clock whose next firing step is kept in a heap.
class SkippingEngine {
 public:
  SkippingEngine(std::span<const std::uint8_t> initial, const QuantileLift& lift, const GrowthSpec& spec,
                 const SimConfig& config, std::uint64_t seed)
      : spec_(spec),
        config_(config),
        rng_(seed),
        bits_(initial.begin(), initial.end()),
        pos_(initial.size()),
        decay_p_(initial.size()),
        marked_(initial.size(), 0) {
    const auto rates = lift.rates();
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      auto& list = bits_[i] ? ones_ : zeros_;
      pos_[i] = static_cast<std::uint32_t>(list.size());
      list.push_back(static_cast<std::uint32_t>(i));
      decay_p_[i] = flip_probability(rates[i], config.dt, config.flip_rule);
    }
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      schedule_decay(static_cast<std::uint32_t>(i), 0);
    }
  }

  void step() {
    const double t = static_cast<double>(k_) * config_.dt;
    const double x = static_cast<double>(ones_.size()) / static_cast<double>(bits_.size());
    const double p_up = flip_probability(spec_.up_intensity(x), config_.dt, config_.flip_rule);
    const double p_down = flip_probability(spec_.down_intensity(t, x), config_.dt, config_.flip_rule);

    up_.clear();
    down_.clear();
    select(zeros_, p_up, up_);
    select(ones_, p_down, down_);
    for (auto site : down_) marked_[site] = 1;

    while (!heap_.empty() && heap_.front().step == k_) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
      const auto site = heap_.back().site;
      heap_.pop_back();
      if (bits_[site] == 1 && !marked_[site]) {
        marked_[site] = 1;
        down_.push_back(site);
      }
      schedule_decay(site, k_ + 1);
    }

    for (auto site : up_) move(site, zeros_, ones_, 1);
    for (auto site : down_) {
      move(site, ones_, zeros_, 0);
      marked_[site] = 0;
    }
    ++k_;
  }

  std::size_t ones() const { return ones_.size(); }
  std::span<const std::uint8_t> bits() const { return bits_; }

 private:
  struct Event {
    std::uint64_t step;
    std::uint32_t site;
    friend bool operator>(const Event& a, const Event& b) {
      return a.step != b.step ? a.step > b.step : a.site > b.site;
    }
  };

  void schedule_decay(std::uint32_t site, std::uint64_t from) {
    const auto skip = geometric_failures(decay_p_[site], rng_);
    if (skip == kNever || skip > kNever - from) return;
    heap_.push_back({from + skip, site});
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
  }

  void select(const std::vector<std::uint32_t>& list, double p, std::vector<std::uint32_t>& out) {
    if (list.empty() || !(p > 0.0)) return;
    std::uint64_t i = geometric_failures(p, rng_);
    while (i < list.size()) {
      out.push_back(list[i]);
      const auto skip = geometric_failures(p, rng_);
      if (skip >= list.size()) break;
      i += 1 + skip;
    }
  }

  void move(std::uint32_t site, std::vector<std::uint32_t>& from, std::vector<std::uint32_t>& to,
            std::uint8_t value) {
    const auto at = pos_[site];
    const auto last = from.back();
    from[at] = last;
    pos_[last] = at;
    from.pop_back();
    pos_[site] = static_cast<std::uint32_t>(to.size());
    to.push_back(site);
    bits_[site] = value;
  }

  const GrowthSpec& spec_;
  const SimConfig& config_;
  Rng rng_;
  std::vector<std::uint8_t> bits_;
  std::vector<std::uint32_t> ones_, zeros_, pos_;
  std::vector<double> decay_p_;
  std::vector<std::uint8_t> marked_;
  std::vector<Event> heap_;
  std::vector<std::uint32_t> up_, down_;
  std::uint64_t k_ = 0;
};

// Runs one path and reports (step, ones, bits) at step 0, every
// `record_every` steps and at the final step.
template <class Engine, class OnRecord>
void run_with(Engine& engine, std::size_t steps, std::size_t record_every, OnRecord&& on_record) {
  on_record(std::size_t{0}, engine.ones(), engine.bits());
  for (std::size_t k = 1; k <= steps; ++k) {
    engine.step();
    if (k % record_every == 0 || k == steps) on_record(k, engine.ones(), engine.bits());
  }
}

template <class OnRecord>
void run_path(std::span<const std::uint8_t> initial, const QuantileLift& lift, const GrowthSpec& spec,
              const SimConfig& config, std::uint64_t seed, MicroEngine engine, std::size_t record_every,
              OnRecord&& on_record) {
  const std::size_t steps = config.steps();
  record_every = std::max<std::size_t>(record_every, 1);
  // Under the linear rule superposed hazards do not factor into independent
  // channels, so only the per-site stepper is exact.
  if (engine == MicroEngine::PerSite || config.flip_rule == FlipRule::Linear) {
    PerSiteEngine e(initial, lift, spec, config, seed);
    run_with(e, steps, record_every, on_record);
  } else {
    SkippingEngine e(initial, lift, spec, config, seed);
    run_with(e, steps, record_every, on_record);
  }
}

}  // namespace

Series simulate_path(std::span<const std::uint8_t> initial, const QuantileLift& lift, const GrowthSpec& spec,
                     const SimConfig& config, const PathOptions& options) {
  config.validate();
  validate_initial(initial, lift);
  Series series;
  const double m = static_cast<double>(lift.m());
  run_path(initial, lift, spec, config, config.seed, options.engine, options.record_every,
           [&](std::size_t k, std::size_t ones, std::span<const std::uint8_t> bits) {
             const double t = static_cast<double>(k) * config.dt;
             series.t.push_back(t);
             series.x.push_back(static_cast<double>(ones) / m);
             if (options.site_observer) options.site_observer(t, bits);
           });
  return series;
}

std::uint64_t path_seed(std::uint64_t master, std::size_t k) { return derive_seed(master, k); }

EnsembleResult ensemble(std::span<const std::uint8_t> initial, const QuantileLift& lift, const GrowthSpec& spec,
                        const SimConfig& config, std::size_t n_paths, const EnsembleOptions& options) {
  config.validate();
  validate_initial(initial, lift);
  if (n_paths == 0) throw std::domain_error("ensemble: n_paths must be at least 1");

  const std::size_t steps = config.steps();
  const std::size_t every = std::max<std::size_t>(options.summary_every, 1);
  std::vector<std::size_t> record_steps;
  for (std::size_t k = 0; k <= steps; ++k) {
    if (k % every == 0 || k == steps) record_steps.push_back(k);
  }

  // Integer accumulators make the merged summaries exact and therefore
  // independent of how paths are split across workers.
  struct Accumulator {
    std::vector<std::uint64_t> sum;
    std::vector<u128> sum_sq;
  };

  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, n_paths);
  std::vector<Accumulator> acc(workers);
  std::vector<double> terminal(n_paths);
  const double m = static_cast<double>(lift.m());

  auto work = [&](std::size_t w) {
    auto& a = acc[w];
    a.sum.assign(record_steps.size(), 0);
    a.sum_sq.assign(record_steps.size(), 0);
    for (std::size_t k = w; k < n_paths; k += workers) {
      std::size_t slot = 0;
      std::size_t last_ones = 0;
      run_path(initial, lift, spec, config, path_seed(config.seed, k), options.engine, every,
               [&](std::size_t, std::size_t ones, std::span<const std::uint8_t>) {
                 a.sum[slot] += ones;
                 a.sum_sq[slot] += static_cast<u128>(ones) * ones;
                 ++slot;
                 last_ones = ones;
               });
      terminal[k] = static_cast<double>(last_ones) / m;
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& th : threads) th.join();
  }

  EnsembleResult result;
  result.terminal = std::move(terminal);
  result.n_paths = n_paths;
  result.seed = config.seed;
  const double n = static_cast<double>(n_paths);
  for (std::size_t s = 0; s < record_steps.size(); ++s) {
    std::uint64_t sum = 0;
    u128 sum_sq = 0;
    for (const auto& a : acc) {
      sum += a.sum[s];
      sum_sq += a.sum_sq[s];
    }
    result.times.push_back(static_cast<double>(record_steps[s]) * config.dt);
    result.mean.push_back(static_cast<double>(sum) / (n * m));
    if (n_paths > 1) {
      // n * S2 - S1^2 is exact in 128-bit arithmetic.
      const u128 s1 = sum;
      const u128 centered = static_cast<u128>(n_paths) * sum_sq - s1 * s1;
      result.variance.push_back(static_cast<double>(centered) / (n * (n - 1.0) * m * m));
    } else {
      result.variance.push_back(0.0);
    }
  }
  return result;
}

MeanVariance decay_mean_variance(const QuantileLift& lift, double t) {
  if (t < 0.0) throw std::domain_error("decay_mean_variance: t must be nonnegative");
  double mean = 0.0;
  double var = 0.0;
  for (double r : lift.rates()) {
    const double s = std::exp(-r * t);
    mean += s;
    var += s * (1.0 - s);
  }
  const double m = static_cast<double>(lift.m());
  return {mean / m, var / (m * m)};
}

std::size_t default_workers() {
  if (const char* env = std::getenv("BENTHIC_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace benthic
