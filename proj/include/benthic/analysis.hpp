#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "benthic/growth.hpp"
#include "benthic/macro_ide.hpp"
#include "benthic/micro_sim.hpp"
#include "benthic/rate_measure.hpp"

namespace benthic {

// ---- convergence ----------------------------------------------------------

struct PowerLawFit {
  double c = 0.0;          // prefactor
  double p = 0.0;          // Er ~ c 2^(-p l)
  double r_squared = 0.0;  // of the regression of log2 Er on l
};

/// Least squares of log2(Er) against l; p = -slope, c = 2^intercept.
/// Throws std::domain_error with fewer than two distinct l or any Er <= 0.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);

/// Mean over k = 1..K of (a_k - b_k)^2; index 0 (the shared initial value) is skipped.
double mean_squared_gap(const Series& a, const Series& b);

struct ConvergencePoint {
  int l = 0;
  std::size_t m = 0;
  double er = 0.0;  // averaged over seeds
  double er_min = 0.0;
  double er_max = 0.0;
  double er_sd = 0.0;  // across seeds
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  std::optional<PowerLawFit> fit;  // empty when the fit is degenerate
  std::string fit_error;
};

/// Supplies the "micro" series for (l, seed); defaults to simulate_path.
using MicroSeriesSource = std::function<Series(int l, std::uint64_t seed, const QuantileLift& lift, const Series& macro)>;

struct ConvergenceOptions {
  int l_min = 1;
  int l_max = 12;
  std::size_t n_seeds = 16;
  MicroEngine engine = MicroEngine::EventSkipping;
  MicroSeriesSource micro_source;
};

/// For each l runs the micro system with M = 2^l and the macro model on the
/// same lift from the all-ones state, and records the time-averaged squared gap.
ConvergenceReport convergence_study(const RateMeasure& measure, const GrowthSpec& spec, const SimConfig& config,
                                    const ConvergenceOptions& options = {});

// ---- tipping --------------------------------------------------------------

enum class Fate { Extinct, Persistent };
std::string to_string(Fate fate);

struct TippingPoint {
  double eta = 0.0;
  Fate fate = Fate::Extinct;
  double terminal = 0.0;
};

struct TippingResult {
  std::vector<TippingPoint> points;  // ascending eta
  std::optional<std::pair<double, double>> bracket;
};

struct TippingOptions {
  std::size_t nodes = 1024;
  std::optional<double> threshold;  // default: the schedule's a_lower
  MacroStepper stepper = MacroStepper::EulerClamp;
};

double persistence_threshold(const GrowthSpec& spec, const TippingOptions& options);
Fate classify_terminal(double terminal, double threshold);

/// Macro run from the all-ones state with the measure's eta replaced.
TippingPoint classify_eta(double eta, const RateMeasure& measure, const GrowthSpec& spec, const SimConfig& config,
                          const TippingOptions& options = {});

TippingResult tipping_sweep(std::span<const double> etas, const RateMeasure& measure, const GrowthSpec& spec,
                            const SimConfig& config, const TippingOptions& options = {});

using Classifier = std::function<Fate(double)>;

/// Shrinks [lo, hi] to width <= tol around the classification flip.
/// Throws std::invalid_argument when both ends classify the same.
std::pair<double, double> bisect_tipping(double lo, double hi, double tol, const Classifier& classify);

std::pair<double, double> bisect_tipping(double lo, double hi, double tol, const RateMeasure& measure,
                                         const GrowthSpec& spec, const SimConfig& config,
                                         const TippingOptions& options = {});

// ---- histograms -----------------------------------------------------------

struct Histogram {
  std::vector<double> bin_edges;  // n_bins + 1 values from 0 to 1
  std::vector<std::size_t> counts;
  std::vector<double> modes;  // bin centers

  std::size_t total() const;
};

struct ModeOptions {
  /// A mode's count must also reach this share of all samples; 0 disables.
  double min_share = 0.0;
  /// When nonzero, samples are taken to lie on the lattice k / lattice and
  /// bins are compared by count per attainable lattice value.
  std::size_t lattice = 0;
};

/// Bins values in [0, 1] uniformly; 1 falls in the last bin.
Histogram make_histogram(std::span<const double> values, std::size_t n_bins, const ModeOptions& modes = {});

/// Indices of bins strictly above each existing neighbour (boundary bins
/// have one neighbour). Empty bins are never modes.
std::vector<std::size_t> find_modes(std::span<const std::size_t> counts, const ModeOptions& options = {});

struct HistogramOptions {
  MicroEngine engine = MicroEngine::EventSkipping;
  std::size_t workers = 1;
  ModeOptions modes;
};

/// Terminal micro aggregates of n_paths runs with eta substituted, binned.
Histogram histogram_ensemble(double eta, std::size_t m, std::size_t n_paths, std::size_t n_bins,
                             const RateMeasure& measure, const GrowthSpec& spec, const SimConfig& config,
                             const HistogramOptions& options = {});

}  // namespace benthic
