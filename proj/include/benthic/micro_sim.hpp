#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "benthic/growth.hpp"
#include "benthic/rate_measure.hpp"
#include "benthic/rng.hpp"
#include "benthic/units.hpp"

namespace benthic {

/// Recorded (t, X) pairs of one run.
struct Series {
  std::vector<double> t;
  std::vector<double> x;

  std::size_t size() const noexcept { return t.size(); }
};

/// How a hazard lambda over one step becomes a flip probability.
enum class FlipRule {
  Exponential,  // 1 - exp(-lambda dt)
  Linear,       // min(1, lambda dt)
};

struct SimConfig {
  double dt = 0.024;    // hours
  double horizon = 168; // hours
  std::uint64_t seed = 0;
  FlipRule flip_rule = FlipRule::Exponential;
  TimeUnit time_unit = TimeUnit::Hour;  // unit the inputs were given in

  void validate() const;
  std::size_t steps() const;
};

double flip_probability(double hazard, double dt, FlipRule rule);

/// Spin configuration of M sites with their decay rates.
struct MicroState {
  double t = 0.0;
  std::vector<std::uint8_t> bits;
  std::shared_ptr<const QuantileLift> lift;
  Rng rng;

  MicroState(std::vector<std::uint8_t> bits, std::shared_ptr<const QuantileLift> lift, std::uint64_t seed,
             double t = 0.0);

  std::size_t ones() const;
};

double aggregate(const MicroState& state);

/// One explicit step: every site sees the aggregate frozen at step start. A
/// 0-site flips up with hazard r X g+(X); a 1-site flips down with hazard
/// r (1 - X) g-(t, X) + R_i.
MicroState step_micro(MicroState state, const GrowthSpec& spec, double dt,
                      FlipRule rule = FlipRule::Exponential);
void advance_micro(MicroState& state, const GrowthSpec& spec, double dt, FlipRule rule = FlipRule::Exponential);

enum class MicroEngine {
  PerSite,        // one uniform per site per step, literally as step_micro
  EventSkipping,  // same law; geometric skips over sites and per-site decay clocks.
                  // Falls back to PerSite under FlipRule::Linear.
};

using SiteObserver = std::function<void(double t, std::span<const std::uint8_t> bits)>;

struct PathOptions {
  MicroEngine engine = MicroEngine::EventSkipping;
  std::size_t record_every = 1;
  SiteObserver site_observer;  // called at every recorded time when set
};

std::vector<std::uint8_t> all_ones(std::size_t m);

Series simulate_path(std::span<const std::uint8_t> initial, const QuantileLift& lift, const GrowthSpec& spec,
                     const SimConfig& config, const PathOptions& options = {});

struct EnsembleOptions {
  MicroEngine engine = MicroEngine::EventSkipping;
  std::size_t workers = 1;
  std::size_t summary_every = 1;
};

struct EnsembleResult {
  std::vector<double> terminal;  // X_T per path, in path order
  std::vector<double> times;     // summary times
  std::vector<double> mean;      // across paths, per summary time
  std::vector<double> variance;  // unbiased sample variance; 0 when n_paths = 1
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
};

/// Seed of path k in an ensemble with master seed `master`.
std::uint64_t path_seed(std::uint64_t master, std::size_t k);

EnsembleResult ensemble(std::span<const std::uint8_t> initial, const QuantileLift& lift, const GrowthSpec& spec,
                        const SimConfig& config, std::size_t n_paths, const EnsembleOptions& options = {});

struct MeanVariance {
  double mean;
  double variance;
};

/// Exact mean and variance of the aggregate when growth is off.
MeanVariance decay_mean_variance(const QuantileLift& lift, double t);

std::size_t default_workers();

}  // namespace benthic
