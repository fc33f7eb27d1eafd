#include "benthic/rate_measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace benthic {

namespace {

constexpr int kMaxGammaIterations = 200000;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

double gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxGammaIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * std::exp(log_prefactor(a, x));
    }
  }
  std::ostringstream msg;
  msg << "incomplete gamma series did not converge (a=" << a << ", x=" << x << ")";
  throw NumericalError(msg.str());
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return std::exp(log_prefactor(a, x)) * h;
    }
  }
  std::ostringstream msg;
  msg << "incomplete gamma continued fraction did not converge (a=" << a << ", x=" << x << ")";
  throw NumericalError(msg.str());
}

double standardized_density(double alpha, double w) {
  if (w <= 0.0) {
    if (alpha < 1.0) return std::numeric_limits<double>::infinity();
    return alpha == 1.0 ? 1.0 : 0.0;
  }
  return boost::math::gamma_p_derivative(alpha, w);
}

// Quantile of the unit-scale gamma law.
double standardized_quantile(double alpha, double p) {
  // P(w) <= w^alpha / Gamma(alpha+1) bounds the quantile from below; Markov
  // (P(W >= c) <= alpha / c) bounds it from above.
  double lo = std::exp((std::log(p) + std::lgamma(alpha + 1.0)) / alpha);
  if (!(lo > 0.0)) lo = std::numeric_limits<double>::min();
  double hi = alpha / (1.0 - p);
  while (regularized_gamma_p(alpha, lo) > p && lo > std::numeric_limits<double>::min()) lo *= 0.5;
  while (regularized_gamma_p(alpha, hi) < p) hi *= 2.0;

  for (int iter = 0; iter < 4000; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi) || hi / lo - 1.0 < 4.0 * kEps) break;
    const double value = regularized_gamma_p(alpha, mid);
    if (value < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi / lo - 1.0 < 1e-13) break;
  }

  // Newton polish inside the bracket.
  double w = std::sqrt(lo * hi);
  for (int iter = 0; iter < 4; ++iter) {
    const double f = regularized_gamma_p(alpha, w) - p;
    const double slope = standardized_density(alpha, w);
    if (!(slope > 0.0) || !std::isfinite(slope)) break;
    const double next = w - f / slope;
    if (!(next > lo && next < hi)) break;
    w = next;
  }
  if (std::abs(regularized_gamma_p(alpha, w) - p) > 1e-10 && hi / lo - 1.0 > 1e-12) {
    std::ostringstream msg;
    msg << "quantile inversion failed for p=" << p << ", bracket [" << lo << ", " << hi << "]";
    throw NumericalError(msg.str());
  }
  return w;
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::domain_error(std::string("RateMeasure: ") + name + " must be positive and finite");
  }
}

template <class F>
double integrate_piece(F&& f, double a, double b, double tolerance) {
  if (!(b > a)) return 0.0;
  // Mapped onto [0, 1]: the Kronrod error estimate does not shrink with the
  // interval, so short pieces would otherwise bisect to full depth.
  const double width = b - a;
  auto unit = [&](double s) { return f(a + width * s); };
  double error = 0.0;
  double l1 = 0.0;
  double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(unit, 0.0, 1.0, 20, tolerance, &error, &l1);
  value *= width;
  error *= width;
  l1 *= width;
  if (!std::isfinite(value) || error > 100.0 * tolerance * std::max(1.0, l1)) {
    std::ostringstream msg;
    msg << "adaptive quadrature did not converge on [" << a << ", " << b << "], error estimate " << error;
    throw NumericalError(msg.str());
  }
  return value;
}

constexpr std::array<double, 9> kBreakLevels{1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999};

}  // namespace

RateMeasure::RateMeasure(double alpha, double beta, double eta) : alpha_(alpha), beta_(beta), eta_(eta) {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(eta, "eta");
}

QuantileLift::QuantileLift(std::vector<double> rates) : rates_(std::move(rates)) {
  if (rates_.empty()) throw std::domain_error("QuantileLift: at least one rate required");
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (!(rates_[i] >= 0.0) || !std::isfinite(rates_[i])) {
      throw std::domain_error("QuantileLift: rates must be finite and nonnegative");
    }
    if (i > 0 && rates_[i] < rates_[i - 1]) {
      throw std::domain_error("QuantileLift: rates must be sorted ascending");
    }
  }
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("regularized_gamma_p: a must be positive");
  if (x < 0.0) throw std::domain_error("regularized_gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_continued_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("regularized_gamma_q: a must be positive");
  if (x < 0.0) throw std::domain_error("regularized_gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_continued_fraction(a, x);
}

double density(const RateMeasure& measure, double r) {
  if (!(r > 0.0)) throw std::domain_error("density: rate must be positive");
  const double b = measure.scale();
  return standardized_density(measure.alpha(), r / b) / b;
}

double cdf(const RateMeasure& measure, double r) {
  if (r < 0.0 || std::isnan(r)) throw std::domain_error("cdf: rate must be nonnegative");
  return regularized_gamma_p(measure.alpha(), r / measure.scale());
}

double quantile(const RateMeasure& measure, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile: p must lie in (0, 1)");
  return measure.scale() * standardized_quantile(measure.alpha(), p);
}

double laplace_transform(const RateMeasure& measure, double t) {
  if (t < 0.0 || std::isnan(t)) throw std::domain_error("laplace_transform: t must be nonnegative");
  return std::pow(1.0 + measure.scale() * t, -measure.alpha());
}

QuantileLift build_quantile_lift(const RateMeasure& measure, std::size_t m) {
  if (m == 0) throw std::domain_error("build_quantile_lift: m must be at least 1");
  std::vector<double> rates(m);
  const double denom = 2.0 * static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    rates[i] = quantile(measure, (2.0 * static_cast<double>(i) + 1.0) / denom);
  }
  return QuantileLift(std::move(rates));
}

double cdf_gap(const QuantileLift& lift, const RateMeasure& measure, std::size_t grid_points) {
  const auto rates = lift.rates();
  const double m = static_cast<double>(lift.m());
  double gap = 0.0;

  // The step function jumps at each rate; compare both one-sided limits.
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double f = cdf(measure, rates[i]);
    gap = std::max(gap, std::abs(f - static_cast<double>(i) / m));
    gap = std::max(gap, std::abs(f - static_cast<double>(i + 1) / m));
  }

  if (grid_points >= 2) {
    const double lo = std::log(std::max(rates.front() * 1e-3, std::numeric_limits<double>::min()));
    const double hi = std::log(rates.back() * 10.0);
    for (std::size_t k = 0; k < grid_points; ++k) {
      const double r = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(grid_points - 1));
      // F_M((0, r)) counts rates strictly below r.
      const auto below = std::lower_bound(rates.begin(), rates.end(), r) - rates.begin();
      gap = std::max(gap, std::abs(cdf(measure, r) - static_cast<double>(below) / m));
    }
  }
  return gap;
}

MeasureIntegrator::MeasureIntegrator(const RateMeasure& measure, double tolerance)
    : measure_(measure), tolerance_(tolerance) {
  const double alpha = measure.alpha();
  breaks_.push_back(0.0);
  for (double level : kBreakLevels) breaks_.push_back(standardized_quantile(alpha, level));
  breaks_.push_back(standardized_quantile(alpha, 1.0 - kTailMass));
  std::sort(breaks_.begin(), breaks_.end());
  breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
}

double MeasureIntegrator::expect(const std::function<double(double)>& phi) const {
  const double alpha = measure_.alpha();
  const double b = measure_.scale();
  double total = 0.0;
  if (alpha < 1.0) {
    const double norm = std::exp(-std::lgamma(alpha + 1.0));
    auto integrand = [&](double u) {
      if (u <= 0.0) return phi(0.0) * norm;
      const double w = std::pow(u, 1.0 / alpha);
      return phi(b * w) * std::exp(-w) * norm;
    };
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
      total += integrate_piece(integrand, std::pow(breaks_[k], alpha), std::pow(breaks_[k + 1], alpha), tolerance_);
    }
  } else {
    auto integrand = [&](double w) { return phi(b * w) * standardized_density(alpha, w); };
    for (std::size_t k = 0; k + 1 < breaks_.size(); ++k) {
      total += integrate_piece(integrand, breaks_[k], breaks_[k + 1], tolerance_);
    }
  }
  return total;
}

double expectation(const RateMeasure& measure, const std::function<double(double)>& phi, double tolerance) {
  return MeasureIntegrator(measure, tolerance).expect(phi);
}

double tv_distance(const RateMeasure& a, const RateMeasure& b) {
  const double alpha_min = std::min(a.alpha(), b.alpha());
  const double upper = std::max(quantile(a, 1.0 - kTailMass), quantile(b, 1.0 - kTailMass));

  std::vector<double> breaks{0.0, upper};
  for (const RateMeasure* m : {&a, &b}) {
    for (double level : kBreakLevels) breaks.push_back(quantile(*m, level));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  while (breaks.back() > upper) breaks.pop_back();

  // Substitute R = u^(1/alpha_min); the Jacobian cancels the R^(alpha-1)
  // singularity of the sharper density.
  auto log_weighted = [alpha_min](const RateMeasure& m, double r) {
    const double s = m.scale();
    return (m.alpha() - alpha_min) * std::log(r) - r / s - std::lgamma(m.alpha()) - m.alpha() * std::log(s);
  };
  auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double r = std::pow(u, 1.0 / alpha_min);
    const double fa = std::exp(log_weighted(a, r));
    const double fb = std::exp(log_weighted(b, r));
    return std::abs(fa - fb) / alpha_min;
  };

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    total += integrate_piece(integrand, std::pow(breaks[k], alpha_min), std::pow(breaks[k + 1], alpha_min), 1e-9);
  }
  return std::clamp(0.5 * total, 0.0, 1.0);
}

}  // namespace benthic
