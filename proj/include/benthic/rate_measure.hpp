#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace benthic {

/// Raised when an iterative numerical routine fails to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gamma-type heterogeneity measure of spin (decay) rates.
///
/// Density R^(alpha-1) exp(-R/b) / (Gamma(alpha) b^alpha) with effective
/// scale b = eta * beta. The abrasion multiplier eta is kept separate from
/// beta so that sweeps can vary it alone. Rates are per hour.
class RateMeasure {
 public:
  RateMeasure(double alpha, double beta, double eta = 1.0);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double eta() const noexcept { return eta_; }
  double scale() const noexcept { return eta_ * beta_; }
  double mean() const noexcept { return alpha_ * scale(); }

  RateMeasure with_eta(double eta) const { return {alpha_, beta_, eta}; }

  friend bool operator==(const RateMeasure&, const RateMeasure&) = default;

 private:
  double alpha_;
  double beta_;
  double eta_;
};

/// Ordered representative rates placed at the (2i-1)/(2M) quantiles.
/// Any ascending nonnegative sequence is accepted, e.g. all zeros to switch decay off.
class QuantileLift {
 public:
  explicit QuantileLift(std::vector<double> rates);

  std::span<const double> rates() const noexcept { return rates_; }
  std::size_t m() const noexcept { return rates_.size(); }
  double operator[](std::size_t i) const { return rates_[i]; }

 private:
  std::vector<double> rates_;
};

/// Regularized lower incomplete gamma P(a, x). Series for x < a + 1,
/// continued fraction otherwise.
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

double density(const RateMeasure& measure, double r);
double cdf(const RateMeasure& measure, double r);
double quantile(const RateMeasure& measure, double p);

/// (1 + eta*beta*t)^(-alpha): the mixture of exp(-R t) under the measure.
double laplace_transform(const RateMeasure& measure, double t);

QuantileLift build_quantile_lift(const RateMeasure& measure, std::size_t m);

/// Sup of |F((0,R)) - F_M((0,R))| over the lift's jump points (both one-sided
/// limits) and a log-spaced grid of `grid_points` rates.
double cdf_gap(const QuantileLift& lift, const RateMeasure& measure,
               std::size_t grid_points = 100000);

/// Half the integrated absolute density difference.
double tv_distance(const RateMeasure& a, const RateMeasure& b);

/// Upper truncation level used by every integral against the measure.
inline constexpr double kTailMass = 1e-9;

/// Integrates functions of R against the measure on (0, quantile(1 - 1e-9)).
///
/// The interval is split at fixed quantile levels so that sharply
/// concentrated measures are resolved. For alpha < 1 the variable is
/// changed to u = (R/b)^alpha, which removes the integrable singularity of
/// the density at the origin.
class MeasureIntegrator {
 public:
  explicit MeasureIntegrator(const RateMeasure& measure, double tolerance = 1e-10);

  double expect(const std::function<double(double)>& phi) const;
  const RateMeasure& measure() const noexcept { return measure_; }

 private:
  RateMeasure measure_;
  double tolerance_;
  std::vector<double> breaks_;  // standardized (R / scale) breakpoints
};

double expectation(const RateMeasure& measure,
                   const std::function<double(double)>& phi,
                   double tolerance = 1e-10);

}  // namespace benthic
