#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace benthic {

// Canonical internal time unit is the hour; rates are per hour.
enum class TimeUnit { Second, Hour, Day };

class UnitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double hours_per(TimeUnit unit) noexcept;
std::string to_string(TimeUnit unit);
TimeUnit parse_time_unit(std::string_view text);

/// "6h", "0.001d", "3600s", "200 day". A bare number is taken as hours.
double parse_duration(std::string_view text);

/// "0.3/d", "0.0125/h", "1.431/hour". A bare number is taken as per hour.
double parse_rate(std::string_view text);

}  // namespace benthic
