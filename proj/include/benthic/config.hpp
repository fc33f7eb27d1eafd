#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "benthic/growth.hpp"
#include "benthic/micro_sim.hpp"
#include "benthic/rate_measure.hpp"

namespace benthic {

using Json = nlohmann::ordered_json;

/// Parameter bundle for one experiment. Times in hours, rates per hour.
struct Preset {
  std::string name;
  RateMeasure measure;
  GrowthSpec growth;
  SimConfig sim;
};

std::vector<std::string> preset_names();
/// Throws std::invalid_argument for an unknown name.
Preset preset(std::string_view name);

Json to_json(const RateMeasure& measure);
Json to_json(const GrowthSpec& growth);
Json to_json(const SimConfig& sim);
Json to_json(const Preset& preset);

// Numbers are canonical (hours, per hour); strings may carry units,
// e.g. "0.3/d" or "30d".
RateMeasure measure_from_json(const Json& j);
GrowthSpec growth_from_json(const Json& j);
SimConfig sim_from_json(const Json& j, SimConfig base = {});

std::string to_string(FlipRule rule);
FlipRule parse_flip_rule(std::string_view text);
std::string to_string(MicroEngine engine);
MicroEngine parse_engine(std::string_view text);
ScheduleDirection parse_schedule_direction(std::string_view text);

}  // namespace benthic
