#include "benthic/config.hpp"

#include <stdexcept>

#include "benthic/units.hpp"

namespace benthic {

namespace {

constexpr double kCase1Alpha = 0.2946;
constexpr double kCase1Beta = 1.431;  // per hour
constexpr double kCase2Alpha = 0.2103;
constexpr double kCase2Beta = 0.8881;  // per hour
constexpr double kGrowthRate = 0.3 / 24.0;  // per hour
constexpr double kDay = 24.0;

double rate_field(const Json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_string()) return parse_rate(v.get<std::string>());
  return v.get<double>();
}

double duration_field(const Json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_string()) return parse_duration(v.get<std::string>());
  return v.get<double>();
}

}  // namespace

std::vector<std::string> preset_names() { return {"case1", "case2", "sec3.2", "sec3.3"}; }

Preset preset(std::string_view name) {
  SimConfig short_run;
  short_run.dt = 0.001;
  short_run.horizon = 6.0;

  SimConfig day_steps;
  day_steps.dt = 0.001 * kDay;

  if (name == "case1") return {"case1", RateMeasure(kCase1Alpha, kCase1Beta), GrowthSpec::none(), short_run};
  if (name == "case2") return {"case2", RateMeasure(kCase2Alpha, kCase2Beta), GrowthSpec::none(), short_run};
  if (name == "sec3.2") {
    day_steps.horizon = 7.0 * kDay;
    return {"sec3.2", RateMeasure(kCase1Alpha, kCase1Beta), GrowthSpec::allee(kGrowthRate, 0.25), day_steps};
  }
  if (name == "sec3.3") {
    day_steps.horizon = 200.0 * kDay;
    const auto schedule = TimeSchedule::sigmoid(0.1, 0.5, 30.0 * kDay, 2.0 * kDay);
    return {"sec3.3", RateMeasure(kCase1Alpha, kCase1Beta), GrowthSpec::allee(kGrowthRate, schedule), day_steps};
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "' (case1, case2, sec3.2, sec3.3)");
}

Json to_json(const RateMeasure& m) { return {{"alpha", m.alpha()}, {"beta", m.beta()}, {"eta", m.eta()}}; }

Json to_json(const GrowthSpec& g) {
  Json j{{"kind", to_string(g.kind())}, {"r", g.r()}};
  if (g.kind() == GrowthKind::Allee) {
    const auto& s = g.schedule();
    if (s.is_constant()) {
      j["a"] = s.a_lower();
    } else {
      j["a_lower"] = s.a_lower();
      j["a_upper"] = s.a_upper();
      j["h"] = s.h();
      j["theta"] = s.theta();
      j["schedule_direction"] = to_string(s.direction());
    }
  }
  return j;
}

Json to_json(const SimConfig& c) {
  return {{"dt", c.dt},
          {"horizon", c.horizon},
          {"seed", c.seed},
          {"flip_rule", to_string(c.flip_rule)},
          {"time_unit", to_string(c.time_unit)}};
}

Json to_json(const Preset& p) {
  return {{"name", p.name},
          {"units", {{"time", "hour"}, {"rate", "1/hour"}}},
          {"measure", to_json(p.measure)},
          {"growth", to_json(p.growth)},
          {"sim", to_json(p.sim)}};
}

RateMeasure measure_from_json(const Json& j) {
  const double eta = j.contains("eta") ? j.at("eta").get<double>() : 1.0;
  return RateMeasure(j.at("alpha").get<double>(), rate_field(j, "beta"), eta);
}

GrowthSpec growth_from_json(const Json& j) {
  const std::string kind = j.value("kind", std::string("allee"));
  const double r = j.contains("r") ? rate_field(j, "r") : 0.0;
  if (kind == "logistic") return GrowthSpec::logistic(r);
  if (kind == "none") return GrowthSpec::none();
  if (kind != "allee") throw std::invalid_argument("growth kind must be logistic, allee or none");
  if (j.contains("a")) return GrowthSpec::allee(r, j.at("a").get<double>());
  const auto direction = parse_schedule_direction(j.value("schedule_direction", std::string("decreasing")));
  return GrowthSpec::allee(r, TimeSchedule::sigmoid(j.at("a_lower").get<double>(), j.at("a_upper").get<double>(),
                                                    duration_field(j, "h"), duration_field(j, "theta"), direction));
}

SimConfig sim_from_json(const Json& j, SimConfig base) {
  if (j.contains("dt")) base.dt = duration_field(j, "dt");
  if (j.contains("horizon")) base.horizon = duration_field(j, "horizon");
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("flip_rule")) base.flip_rule = parse_flip_rule(j.at("flip_rule").get<std::string>());
  if (j.contains("time_unit")) base.time_unit = parse_time_unit(j.at("time_unit").get<std::string>());
  return base;
}

std::string to_string(FlipRule rule) { return rule == FlipRule::Exponential ? "exponential" : "linear"; }

FlipRule parse_flip_rule(std::string_view text) {
  if (text == "exponential" || text == "exp") return FlipRule::Exponential;
  if (text == "linear") return FlipRule::Linear;
  throw std::invalid_argument("flip rule must be exponential or linear");
}

std::string to_string(MicroEngine engine) { return engine == MicroEngine::PerSite ? "per-site" : "skipping"; }

MicroEngine parse_engine(std::string_view text) {
  if (text == "per-site") return MicroEngine::PerSite;
  if (text == "skipping") return MicroEngine::EventSkipping;
  throw std::invalid_argument("engine must be per-site or skipping");
}

ScheduleDirection parse_schedule_direction(std::string_view text) {
  if (text == "decreasing") return ScheduleDirection::Decreasing;
  if (text == "as-printed" || text == "increasing") return ScheduleDirection::AsPrinted;
  throw std::invalid_argument("schedule direction must be decreasing or as-printed");
}

}  // namespace benthic
