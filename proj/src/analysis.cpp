#include "benthic/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace benthic {

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::domain_error("fit_power_law: degenerate fit, need at least two points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [l, er] : points) {
    if (!(er > 0.0) || !std::isfinite(er)) {
      throw std::domain_error("fit_power_law: degenerate fit, every Er must be positive");
    }
    sx += l;
    sy += std::log2(er);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [l, er] : points) {
    const double dx = l - mx;
    const double dy = std::log2(er) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw std::domain_error("fit_power_law: degenerate fit, l values must differ");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  PowerLawFit fit;
  fit.p = -slope;
  fit.c = std::exp2(intercept);
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

double mean_squared_gap(const Series& a, const Series& b) {
  if (a.size() != b.size()) throw std::invalid_argument("mean_squared_gap: series lengths differ");
  if (a.size() < 2) throw std::invalid_argument("mean_squared_gap: need at least one step");
  double sum = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    const double d = a.x[k] - b.x[k];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size() - 1);
}

ConvergenceReport convergence_study(const RateMeasure& measure, const GrowthSpec& spec, const SimConfig& config,
                                    const ConvergenceOptions& options) {
  if (options.l_min < 0 || options.l_max < options.l_min) throw std::domain_error("convergence_study: empty l range");
  if (options.n_seeds == 0) throw std::domain_error("convergence_study: n_seeds must be at least 1");
  config.validate();

  ConvergenceReport report;
  for (int l = options.l_min; l <= options.l_max; ++l) {
    const std::size_t m = std::size_t{1} << l;
    const auto lift = build_quantile_lift(measure, m);
    const std::vector<double> ones(m, 1.0);
    const Series macro = simulate_macro(ones, lift, spec, config);
    const auto bits = all_ones(m);

    std::vector<double> errors;
    for (std::size_t s = 0; s < options.n_seeds; ++s) {
      const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(l), s);
      Series micro;
      if (options.micro_source) {
        micro = options.micro_source(l, seed, lift, macro);
      } else {
        SimConfig c = config;
        c.seed = seed;
        PathOptions po;
        po.engine = options.engine;
        micro = simulate_path(bits, lift, spec, c, po);
      }
      errors.push_back(mean_squared_gap(micro, macro));
    }

    ConvergencePoint point;
    point.l = l;
    point.m = m;
    const double n = static_cast<double>(errors.size());
    point.er = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
    point.er_min = *std::min_element(errors.begin(), errors.end());
    point.er_max = *std::max_element(errors.begin(), errors.end());
    double ss = 0.0;
    for (double e : errors) ss += (e - point.er) * (e - point.er);
    point.er_sd = errors.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    report.points.push_back(point);
  }

  std::vector<std::pair<double, double>> pts;
  for (const auto& p : report.points) pts.emplace_back(static_cast<double>(p.l), p.er);
  try {
    report.fit = fit_power_law(pts);
  } catch (const std::domain_error& e) {
    report.fit_error = e.what();
  }
  return report;
}

std::string to_string(Fate fate) { return fate == Fate::Extinct ? "extinct" : "persistent"; }

double persistence_threshold(const GrowthSpec& spec, const TippingOptions& options) {
  if (options.threshold) return *options.threshold;
  return spec.schedule().a_lower();
}

Fate classify_terminal(double terminal, double threshold) {
  return terminal > threshold ? Fate::Persistent : Fate::Extinct;
}

TippingPoint classify_eta(double eta, const RateMeasure& measure, const GrowthSpec& spec, const SimConfig& config,
                          const TippingOptions& options) {
  const auto scaled = measure.with_eta(eta);
  const auto lift = build_quantile_lift(scaled, options.nodes);
  const std::vector<double> ones(lift.m(), 1.0);
  TippingPoint point;
  point.eta = eta;
  point.terminal = terminal_macro(ones, lift, spec, config, options.stepper);
  point.fate = classify_terminal(point.terminal, persistence_threshold(spec, options));
  return point;
}

TippingResult tipping_sweep(std::span<const double> etas, const RateMeasure& measure, const GrowthSpec& spec,
                            const SimConfig& config, const TippingOptions& options) {
  std::vector<double> sorted(etas.begin(), etas.end());
  std::sort(sorted.begin(), sorted.end());
  TippingResult result;
  for (double eta : sorted) result.points.push_back(classify_eta(eta, measure, spec, config, options));
  for (std::size_t i = 1; i < result.points.size(); ++i) {
    if (result.points[i].fate != result.points[i - 1].fate) {
      result.bracket = std::make_pair(result.points[i - 1].eta, result.points[i].eta);
      break;
    }
  }
  return result;
}

std::pair<double, double> bisect_tipping(double lo, double hi, double tol, const Classifier& classify) {
  if (!(lo < hi)) throw std::invalid_argument("bisect_tipping: need lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("bisect_tipping: tol must be positive");
  const Fate at_lo = classify(lo);
  if (classify(hi) == at_lo) throw std::invalid_argument("bisect_tipping: classification equal at both ends");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (classify(mid) == at_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

std::pair<double, double> bisect_tipping(double lo, double hi, double tol, const RateMeasure& measure,
                                         const GrowthSpec& spec, const SimConfig& config,
                                         const TippingOptions& options) {
  return bisect_tipping(lo, hi, tol,
                        [&](double eta) { return classify_eta(eta, measure, spec, config, options).fate; });
}

std::size_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

namespace {

// Bin index of v under uniform binning of [0, 1]; 1 goes to the last bin.
std::size_t bin_of(double v, std::size_t n_bins) {
  return std::min(static_cast<std::size_t>(v * static_cast<double>(n_bins)), n_bins - 1);
}

}  // namespace

std::vector<std::size_t> find_modes(std::span<const std::size_t> counts, const ModeOptions& options) {
  std::vector<std::size_t> modes;
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  const double floor = options.min_share * static_cast<double>(total);

  std::vector<double> height(counts.begin(), counts.end());
  if (options.lattice > 0 && !counts.empty()) {
    std::vector<std::size_t> sites(counts.size(), 0);
    const double m = static_cast<double>(options.lattice);
    for (std::size_t k = 0; k <= options.lattice; ++k) ++sites[bin_of(static_cast<double>(k) / m, counts.size())];
    for (std::size_t i = 0; i < counts.size(); ++i) {
      height[i] = sites[i] > 0 ? height[i] / static_cast<double>(sites[i]) : 0.0;
    }
  }

  for (std::size_t i = 0; i < counts.size(); ++i) {
    const bool above_left = i == 0 || height[i] > height[i - 1];
    const bool above_right = i + 1 == counts.size() || height[i] > height[i + 1];
    if (above_left && above_right && counts[i] > 0 && static_cast<double>(counts[i]) >= floor) {
      modes.push_back(i);
    }
  }
  return modes;
}

Histogram make_histogram(std::span<const double> values, std::size_t n_bins, const ModeOptions& mode_options) {
  if (n_bins < 2) throw std::domain_error("make_histogram: need at least 2 bins");
  Histogram h;
  h.counts.assign(n_bins, 0);
  for (std::size_t i = 0; i <= n_bins; ++i) h.bin_edges.push_back(static_cast<double>(i) / static_cast<double>(n_bins));
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("make_histogram: values must lie in [0, 1]");
    h.counts[bin_of(v, n_bins)] += 1;
  }
  for (auto i : find_modes(h.counts, mode_options)) h.modes.push_back(0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]));
  return h;
}

Histogram histogram_ensemble(double eta, std::size_t m, std::size_t n_paths, std::size_t n_bins,
                             const RateMeasure& measure, const GrowthSpec& spec, const SimConfig& config,
                             const HistogramOptions& options) {
  if (n_paths == 0) throw std::domain_error("histogram_ensemble: n_paths must be at least 1");
  if (n_bins < 2) throw std::domain_error("histogram_ensemble: need at least 2 bins");
  const auto lift = build_quantile_lift(measure.with_eta(eta), m);
  EnsembleOptions eo;
  eo.engine = options.engine;
  eo.workers = options.workers;
  eo.summary_every = std::max<std::size_t>(config.steps(), 1);
  const auto result = ensemble(all_ones(m), lift, spec, config, n_paths, eo);
  return make_histogram(result.terminal, n_bins, options.modes);
}

}  // namespace benthic
