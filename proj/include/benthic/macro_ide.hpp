#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "benthic/growth.hpp"
#include "benthic/micro_sim.hpp"
#include "benthic/rate_measure.hpp"

namespace benthic {

/// Occupancy x_i in [0, 1] at each lift node; the aggregate is their mean.
struct MacroState {
  double t = 0.0;
  std::vector<double> occupancy;
  std::shared_ptr<const QuantileLift> lift;

  MacroState(std::vector<double> occupancy, std::shared_ptr<const QuantileLift> lift, double t = 0.0);
};

double aggregate(const MacroState& state);

enum class MacroStepper {
  EulerClamp,            // explicit Euler followed by a clamp to [0, 1]
  ExponentialIntegrator, // exact per-node solve with the aggregate frozen over the step
};

/// One step with the aggregate X frozen at step start:
///   x_i += dt [ r X g+(X) - (R_i + r X g+(X) + r (1 - X) g-(t, X)) x_i ].
MacroState step_macro(MacroState state, const GrowthSpec& spec, double dt,
                      MacroStepper stepper = MacroStepper::EulerClamp);
void advance_macro(MacroState& state, const GrowthSpec& spec, double dt,
                   MacroStepper stepper = MacroStepper::EulerClamp);

using NodeObserver = std::function<void(double t, std::span<const double> rates, std::span<const double> occupancy)>;

struct MacroOptions {
  MacroStepper stepper = MacroStepper::EulerClamp;
  std::size_t record_every = 1;
  NodeObserver node_observer;
};

Series simulate_macro(std::span<const double> initial, const QuantileLift& lift, const GrowthSpec& spec,
                      const SimConfig& config, const MacroOptions& options = {});

/// Terminal aggregate only; avoids building the series.
double terminal_macro(std::span<const double> initial, const QuantileLift& lift, const GrowthSpec& spec,
                      const SimConfig& config, MacroStepper stepper = MacroStepper::EulerClamp);

/// Limit of the decay-only aggregate: the Laplace transform of the measure.
double decay_only_solution(const RateMeasure& measure, double t);

/// Consistency function whose roots H(X) = 1 are the positive equilibria:
///   H(X) = integral of g+(X) / (R / r + X g+(X) + (1 - X) g-(X)) F(dR).
/// Requires a constant threshold.
double h_function(double x, const RateMeasure& measure, const GrowthSpec& spec);

/// H evaluated against the lift's uniform atoms instead of the measure.
double h_function_discrete(double x, const QuantileLift& lift, const GrowthSpec& spec);

enum class Stability { Stable, Saddle };

struct EquilibriumRoot {
  double x;
  Stability stability;
};

struct EquilibriumResult {
  std::vector<EquilibriumRoot> roots;  // ascending in x
  bool extinction_only = true;
  /// Stationary occupancy at the lift nodes for the stable root, generated
  /// from the root of the lift-discretized consistency equation so that it
  /// is an exact fixed point of step_macro. Empty when extinction_only.
  std::vector<double> profile;
  double profile_root = 0.0;
  std::shared_ptr<const QuantileLift> lift;
};

struct EquilibriumOptions {
  std::size_t grid_points = 10000;
  double root_tolerance = 1e-10;
  std::size_t profile_nodes = 1024;
};

EquilibriumResult solve_equilibrium(const RateMeasure& measure, const GrowthSpec& spec,
                                    const EquilibriumOptions& options = {});

/// Stationary occupancy x(R_i) = r X g+(X) / (R_i + r X g+(X) + r (1 - X) g-(X)).
std::vector<double> equilibrium_profile(double x_inf, const QuantileLift& lift, const GrowthSpec& spec);

std::string to_string(Stability s);

}  // namespace benthic
