#include "benthic/growth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace benthic {

namespace {

double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

void require_open_unit(double a, const char* name) {
  if (!(a > 0.0 && a < 1.0)) throw std::domain_error(std::string("TimeSchedule: ") + name + " must lie in (0, 1)");
}

}  // namespace

TimeSchedule TimeSchedule::constant(double a) {
  require_open_unit(a, "a");
  TimeSchedule s;
  s.constant_ = true;
  s.a_lower_ = a;
  s.a_upper_ = a;
  return s;
}

TimeSchedule TimeSchedule::sigmoid(double a_lower, double a_upper, double h, double theta,
                                   ScheduleDirection direction) {
  require_open_unit(a_lower, "a_lower");
  require_open_unit(a_upper, "a_upper");
  if (!(a_lower < a_upper)) throw std::domain_error("TimeSchedule: a_lower must be below a_upper");
  if (!(h > 0.0)) throw std::domain_error("TimeSchedule: h must be positive");
  if (!(theta > 0.0)) throw std::domain_error("TimeSchedule: theta must be positive");
  TimeSchedule s;
  s.constant_ = false;
  s.a_lower_ = a_lower;
  s.a_upper_ = a_upper;
  s.h_ = h;
  s.theta_ = theta;
  s.direction_ = direction;
  return s;
}

double TimeSchedule::at(double t) const {
  if (constant_) return a_lower_;
  const double half_span = 0.5 * (a_upper_ - a_lower_);
  const double sig = 1.0 + std::tanh((t - h_) / theta_);
  if (direction_ == ScheduleDirection::Decreasing) return a_upper_ - half_span * sig;
  return a_lower_ + half_span * sig;
}

double a_at(const TimeSchedule& schedule, double t) { return schedule.at(t); }

GrowthSpec::GrowthSpec(GrowthKind kind, double r, TimeSchedule schedule)
    : kind_(kind), r_(r), schedule_(schedule) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::domain_error("GrowthSpec: r must be nonnegative");
}

GrowthSpec GrowthSpec::logistic(double r) { return {GrowthKind::Logistic, r, TimeSchedule::constant(0.5)}; }

GrowthSpec GrowthSpec::allee(double r, TimeSchedule schedule) { return {GrowthKind::Allee, r, schedule}; }

GrowthSpec GrowthSpec::with_r(double r) const { return {kind_, r, schedule_}; }

double GrowthSpec::g_plus(double x) const { return kind_ == GrowthKind::Logistic ? 1.0 : clamp_unit(x); }

double GrowthSpec::g_minus(double t, double) const {
  return kind_ == GrowthKind::Logistic ? 0.0 : schedule_.at(t);
}

double GrowthSpec::down_intensity(double t, double x) const {
  const double xc = clamp_unit(x);
  return r_ * (1.0 - xc) * g_minus(t, xc);
}

double g_plus(const GrowthSpec& spec, double x) { return spec.g_plus(x); }
double g_minus(const GrowthSpec& spec, double t, double x) { return spec.g_minus(t, x); }

double growth_rate(const GrowthSpec& spec, double t, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("growth_rate: x must lie in [0, 1]");
  return spec.r() * x * (1.0 - x) * (spec.g_plus(x) - spec.g_minus(t, x));
}

double logistic_closed_form(double x0, double r, double t) {
  if (!(x0 >= 0.0 && x0 <= 1.0)) throw std::domain_error("logistic_closed_form: x0 must lie in [0, 1]");
  if (x0 == 0.0 || x0 == 1.0) return x0;
  // x0 e^{rt} / (1 - x0 + x0 e^{rt}), rearranged to avoid overflow.
  return x0 / (x0 + (1.0 - x0) * std::exp(-r * t));
}

std::string to_string(GrowthKind kind) { return kind == GrowthKind::Logistic ? "logistic" : "allee"; }

std::string to_string(ScheduleDirection direction) {
  return direction == ScheduleDirection::Decreasing ? "decreasing" : "as-printed";
}

}  // namespace benthic
