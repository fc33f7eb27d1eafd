#include "benthic/macro_ide.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace benthic {

MacroState::MacroState(std::vector<double> occ, std::shared_ptr<const QuantileLift> l, double time)
    : t(time), occupancy(std::move(occ)), lift(std::move(l)) {
  if (!lift) throw std::invalid_argument("MacroState: lift required");
  if (occupancy.size() != lift->m()) throw std::invalid_argument("MacroState: occupancy length must equal lift size");
  for (double v : occupancy) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("MacroState: occupancy must lie in [0, 1]");
  }
}

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void validate_initial(std::span<const double> initial, const QuantileLift& lift) {
  if (initial.size() != lift.m()) throw std::invalid_argument("initial occupancy length must equal lift size");
  for (double v : initial) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("initial occupancy must lie in [0, 1]");
  }
}

// Per-node update shared by the single-step API and the runners. `decay`
// holds exp(-R_i dt) for the exponential integrator and is unused by Euler.
void update_nodes(std::span<double> x, std::span<const double> rates, std::span<const double> decay,
                  const GrowthSpec& spec, double t, double dt, MacroStepper stepper) {
  const double agg = mean_of(x);
  const double gain = spec.up_intensity(agg);
  const double loss = gain + spec.down_intensity(t, agg);
  if (stepper == MacroStepper::EulerClamp) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double next = x[i] + dt * (gain - (rates[i] + loss) * x[i]);
      x[i] = std::clamp(next, 0.0, 1.0);
    }
    return;
  }
  const double growth_decay = std::exp(-loss * dt);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = rates[i] + loss;
    if (k > 0.0) {
      const double e = decay[i] * growth_decay;
      x[i] = std::clamp(x[i] * e + gain / k * (1.0 - e), 0.0, 1.0);
    } else {
      x[i] = std::clamp(x[i] + gain * dt, 0.0, 1.0);
    }
  }
}

std::vector<double> decay_factors(const QuantileLift& lift, double dt, MacroStepper stepper) {
  std::vector<double> out;
  if (stepper == MacroStepper::ExponentialIntegrator) {
    out.reserve(lift.m());
    for (double r : lift.rates()) out.push_back(std::exp(-r * dt));
  }
  return out;
}

double g_minus_constant(const GrowthSpec& spec) {
  if (spec.kind() == GrowthKind::Allee && !spec.schedule().is_constant()) {
    throw std::invalid_argument("equilibrium analysis requires a constant Allee threshold");
  }
  return spec.g_minus(0.0, 0.0);
}

}  // namespace

double aggregate(const MacroState& state) { return mean_of(state.occupancy); }

void advance_macro(MacroState& state, const GrowthSpec& spec, double dt, MacroStepper stepper) {
  if (!(dt > 0.0)) throw std::domain_error("step_macro: dt must be positive");
  const auto decay = decay_factors(*state.lift, dt, stepper);
  update_nodes(state.occupancy, state.lift->rates(), decay, spec, state.t, dt, stepper);
  state.t += dt;
}

MacroState step_macro(MacroState state, const GrowthSpec& spec, double dt, MacroStepper stepper) {
  advance_macro(state, spec, dt, stepper);
  return state;
}

Series simulate_macro(std::span<const double> initial, const QuantileLift& lift, const GrowthSpec& spec,
                      const SimConfig& config, const MacroOptions& options) {
  config.validate();
  validate_initial(initial, lift);
  const std::size_t steps = config.steps();
  const std::size_t every = std::max<std::size_t>(options.record_every, 1);
  const auto decay = decay_factors(lift, config.dt, options.stepper);
  std::vector<double> x(initial.begin(), initial.end());

  Series series;
  auto record = [&](std::size_t k) {
    const double t = static_cast<double>(k) * config.dt;
    series.t.push_back(t);
    series.x.push_back(mean_of(x));
    if (options.node_observer) options.node_observer(t, lift.rates(), x);
  };
  record(0);
  for (std::size_t k = 0; k < steps; ++k) {
    update_nodes(x, lift.rates(), decay, spec, static_cast<double>(k) * config.dt, config.dt, options.stepper);
    if ((k + 1) % every == 0 || k + 1 == steps) record(k + 1);
  }
  return series;
}

double terminal_macro(std::span<const double> initial, const QuantileLift& lift, const GrowthSpec& spec,
                      const SimConfig& config, MacroStepper stepper) {
  config.validate();
  validate_initial(initial, lift);
  const auto decay = decay_factors(lift, config.dt, stepper);
  std::vector<double> x(initial.begin(), initial.end());
  const std::size_t steps = config.steps();
  for (std::size_t k = 0; k < steps; ++k) {
    update_nodes(x, lift.rates(), decay, spec, static_cast<double>(k) * config.dt, config.dt, stepper);
  }
  return mean_of(x);
}

double decay_only_solution(const RateMeasure& measure, double t) { return laplace_transform(measure, t); }

namespace {

// r g+ / (R + r X g+ + r (1 - X) g-): the integrand of H with r multiplied
// through so that r = 0 is harmless.
struct HIntegrand {
  double r, gp, x, gm;
  double operator()(double rate) const { return r * gp / (rate + r * (x * gp + (1.0 - x) * gm)); }
};

HIntegrand make_integrand(double x, const GrowthSpec& spec) {
  if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("h_function: x must lie in (0, 1]");
  return {spec.r(), spec.g_plus(x), x, g_minus_constant(spec)};
}

double h_with(const MeasureIntegrator& integrator, double x, const GrowthSpec& spec) {
  const auto f = make_integrand(x, spec);
  return integrator.expect(f);
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double h_function(double x, const RateMeasure& measure, const GrowthSpec& spec) {
  return h_with(MeasureIntegrator(measure, 1e-10), x, spec);
}

double h_function_discrete(double x, const QuantileLift& lift, const GrowthSpec& spec) {
  const auto f = make_integrand(x, spec);
  double sum = 0.0;
  for (double r : lift.rates()) sum += f(r);
  return sum / static_cast<double>(lift.m());
}

std::vector<double> equilibrium_profile(double x_inf, const QuantileLift& lift, const GrowthSpec& spec) {
  const double gain = spec.r() * x_inf * spec.g_plus(x_inf);
  const double loss = gain + spec.r() * (1.0 - x_inf) * g_minus_constant(spec);
  std::vector<double> out;
  out.reserve(lift.m());
  for (double r : lift.rates()) {
    const double denom = r + loss;
    out.push_back(denom > 0.0 ? gain / denom : 0.0);
  }
  return out;
}

EquilibriumResult solve_equilibrium(const RateMeasure& measure, const GrowthSpec& spec,
                                    const EquilibriumOptions& options) {
  if (options.grid_points < 2) throw std::domain_error("solve_equilibrium: grid needs at least 2 points");
  g_minus_constant(spec);
  const MeasureIntegrator integrator(measure, 1e-10);
  auto excess = [&](double x) { return h_with(integrator, x, spec) - 1.0; };

  const std::size_t n = options.grid_points;
  std::vector<double> roots;
  double prev_x = 1.0 / static_cast<double>(n);
  double prev = excess(prev_x);
  if (prev == 0.0) roots.push_back(prev_x);
  for (std::size_t j = 2; j <= n; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(n);
    const double value = excess(x);
    if (value == 0.0) {
      roots.push_back(x);
    } else if (prev != 0.0 && (value < 0.0) != (prev < 0.0)) {
      roots.push_back(bisect_root(excess, prev_x, x, options.root_tolerance));
    }
    prev_x = x;
    prev = value;
  }

  EquilibriumResult result;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    result.roots.push_back({roots[i], i + 1 == roots.size() ? Stability::Stable : Stability::Saddle});
  }
  result.extinction_only = roots.empty();
  if (result.extinction_only || options.profile_nodes == 0) return result;

  auto lift = std::make_shared<QuantileLift>(build_quantile_lift(measure, options.profile_nodes));
  const double stable = roots.back();
  const double lower = roots.size() >= 2 ? 0.5 * (roots[roots.size() - 2] + stable) : 0.5 * stable;
  auto discrete_excess = [&](double x) { return h_function_discrete(x, *lift, spec) - 1.0; };
  double root = stable;
  if (discrete_excess(lower) > 0.0 && discrete_excess(1.0) < 0.0) {
    root = bisect_root(discrete_excess, lower, 1.0, 1e-15);
  }
  result.profile_root = root;
  result.profile = equilibrium_profile(root, *lift, spec);
  result.lift = std::move(lift);
  return result;
}

std::string to_string(Stability s) { return s == Stability::Stable ? "stable" : "saddle"; }

}  // namespace benthic
