#include "benthic/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace benthic {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits "<number><rest>" and parses the number.
double leading_number(std::string_view text, std::string_view& rest) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr == text.data() || !std::isfinite(value)) {
    throw UnitError("expected a number in '" + std::string(text) + "'");
  }
  rest = trim(text.substr(static_cast<std::size_t>(ptr - text.data())));
  return value;
}

}  // namespace

double hours_per(TimeUnit unit) noexcept {
  switch (unit) {
    case TimeUnit::Second: return 1.0 / 3600.0;
    case TimeUnit::Hour: return 1.0;
    case TimeUnit::Day: return 24.0;
  }
  return 1.0;
}

std::string to_string(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::Second: return "second";
    case TimeUnit::Hour: return "hour";
    case TimeUnit::Day: return "day";
  }
  return "hour";
}

TimeUnit parse_time_unit(std::string_view text) {
  text = trim(text);
  if (text == "s" || text == "sec" || text == "second" || text == "seconds") return TimeUnit::Second;
  if (text == "h" || text == "hr" || text == "hour" || text == "hours") return TimeUnit::Hour;
  if (text == "d" || text == "day" || text == "days") return TimeUnit::Day;
  throw UnitError("unknown time unit '" + std::string(text) + "' (use s, h or d)");
}

double parse_duration(std::string_view text) {
  std::string_view rest;
  const double value = leading_number(text, rest);
  if (rest.empty()) return value;
  return value * hours_per(parse_time_unit(rest));
}

double parse_rate(std::string_view text) {
  std::string_view rest;
  const double value = leading_number(text, rest);
  if (rest.empty()) return value;
  if (rest.front() != '/') throw UnitError("rate '" + std::string(text) + "' must look like <value>/<unit>");
  rest.remove_prefix(1);
  return value / hours_per(parse_time_unit(rest));
}

}  // namespace benthic
