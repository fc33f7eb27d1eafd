#pragma once

#include <string>

namespace benthic {

enum class ScheduleDirection {
  Decreasing,  // falls from a_upper to a_lower around t = h
  AsPrinted,   // a_lower + (a_upper - a_lower)/2 (1 + tanh((t - h)/theta)), rising
};

/// Allee threshold a_t: either constant or a tanh sigmoid between two levels.
/// Times are in hours.
class TimeSchedule {
 public:
  static TimeSchedule constant(double a);
  static TimeSchedule sigmoid(double a_lower, double a_upper, double h, double theta,
                              ScheduleDirection direction = ScheduleDirection::Decreasing);

  bool is_constant() const noexcept { return constant_; }
  double a_lower() const noexcept { return a_lower_; }
  double a_upper() const noexcept { return a_upper_; }
  double h() const noexcept { return h_; }
  double theta() const noexcept { return theta_; }
  ScheduleDirection direction() const noexcept { return direction_; }

  double at(double t) const;

  friend bool operator==(const TimeSchedule&, const TimeSchedule&) = default;

 private:
  TimeSchedule() = default;

  bool constant_ = true;
  double a_lower_ = 0.5;
  double a_upper_ = 0.5;
  double h_ = 0.0;
  double theta_ = 1.0;
  ScheduleDirection direction_ = ScheduleDirection::Decreasing;
};

double a_at(const TimeSchedule& schedule, double t);

enum class GrowthKind { Logistic, Allee };

/// Growth rate G(x) = r x (1 - x) (g+(x) - g-(t, x)).
///
/// Logistic: g+ = 1, g- = 0. Allee: g+(x) = clamp(x, 0, 1), g- = a_t.
class GrowthSpec {
 public:
  static GrowthSpec logistic(double r);
  static GrowthSpec allee(double r, TimeSchedule schedule);
  static GrowthSpec allee(double r, double a) { return allee(r, TimeSchedule::constant(a)); }
  /// r = 0: pure decay. Kind is irrelevant since every intensity carries r.
  static GrowthSpec none() { return logistic(0.0); }

  GrowthKind kind() const noexcept { return kind_; }
  double r() const noexcept { return r_; }
  const TimeSchedule& schedule() const noexcept { return schedule_; }

  GrowthSpec with_r(double r) const;

  double g_plus(double x) const;
  double g_minus(double t, double x) const;

  /// Intensity of 0 -> 1 flips: r X g+(X).
  double up_intensity(double x) const { return r_ * x * g_plus(x); }
  /// Growth-driven intensity of 1 -> 0 flips: r (1 - X) g-(t, X).
  double down_intensity(double t, double x) const;

  friend bool operator==(const GrowthSpec&, const GrowthSpec&) = default;

 private:
  GrowthSpec(GrowthKind kind, double r, TimeSchedule schedule);

  GrowthKind kind_;
  double r_;
  TimeSchedule schedule_;
};

double g_plus(const GrowthSpec& spec, double x);
double g_minus(const GrowthSpec& spec, double t, double x);
double growth_rate(const GrowthSpec& spec, double t, double x);

/// Solution of dx/dt = r x (1 - x) from x0.
double logistic_closed_form(double x0, double r, double t);

std::string to_string(GrowthKind kind);
std::string to_string(ScheduleDirection direction);

}  // namespace benthic
