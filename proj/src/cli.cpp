#include "benthic/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "benthic/analysis.hpp"
#include "benthic/calibrate.hpp"
#include "benthic/config.hpp"
#include "benthic/macro_ide.hpp"
#include "benthic/micro_sim.hpp"
#include "benthic/output.hpp"
#include "benthic/units.hpp"

namespace benthic::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& flag, const std::string& message) : std::runtime_error(flag + ": " + message) {}
};

template <class F>
auto with_flag(const std::string& flag, F&& f) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(flag, e.what());
  }
}

double number(const std::string& flag, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw UsageError(flag, "expected a number, got '" + text + "'");
  return v;
}

double positive(const std::string& flag, double v) {
  if (!(v > 0.0)) throw UsageError(flag, "must be positive");
  return v;
}

// Storage for every flag of every subcommand; only one subcommand parses.
struct Args {
  std::map<std::string, std::string> text;  // unit-bearing or textual model flags
  bool no_growth = false;
  bool lattice_modes = false;
  std::uint64_t seed = 0;
  long long steps = 0;
  std::size_t workers = 0;
  std::size_t m = 0;
  std::size_t paths = 1;
  std::size_t hist_paths = 2000;
  std::size_t record_every = 1;
  std::size_t points = 61;
  std::size_t bins = 50;
  int l_min = 1;
  int l_max = 12;
  std::size_t seeds = 16;
  std::vector<double> etas;
  std::vector<double> bisect;
  double tol = 1e-5;
  double threshold = 0.0;
  double min_share = 0.0;
  double init = 1.0;
  std::size_t grid = 10000;
  std::string model = "both";
  std::string engine = "skipping";
  std::string stepper = "euler";
  std::string out, json, plot, dump_sites, dump_nodes, input;
};

bool given(const CLI::App* sub, const std::string& flag) {
  try {
    return sub->count(flag) > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

void add_model_flags(CLI::App* s, Args& a) {
  s->add_option("--preset", a.text["preset"], "parameter preset")->check(CLI::IsMember(preset_names()));
  s->add_option("--config", a.text["config"], "JSON config with measure/growth/sim records")
      ->check(CLI::ExistingFile);
  s->add_option("--alpha", a.text["alpha"], "measure shape");
  s->add_option("--beta", a.text["beta"], "measure scale rate, e.g. 1.431/h");
  s->add_option("--eta", a.text["eta"], "abrasion multiplier");
  s->add_option("--growth", a.text["growth"], "growth kind")->check(CLI::IsMember({"allee", "logistic", "none"}));
  s->add_option("--r", a.text["r"], "growth rate, e.g. 0.3/d");
  s->add_option("--a", a.text["a"], "constant Allee threshold");
  s->add_option("--a-lower", a.text["a-lower"], "lower threshold level");
  s->add_option("--a-upper", a.text["a-upper"], "upper threshold level");
  s->add_option("--midpoint", a.text["midpoint"], "threshold switch time h, e.g. 30d");
  s->add_option("--theta", a.text["theta"], "threshold switch width, e.g. 2d");
  s->add_option("--schedule-direction", a.text["schedule-direction"], "decreasing or as-printed")
      ->check(CLI::IsMember({"decreasing", "as-printed"}));
  s->add_flag("--no-growth", a.no_growth, "pure decay");
}

void add_sim_flags(CLI::App* s, Args& a) {
  s->add_option("--dt", a.text["dt"], "time step, e.g. 0.001d");
  s->add_option("--t-max", a.text["t-max"], "horizon, e.g. 200d");
  s->add_option("--steps", a.steps, "number of steps (overrides --t-max)")->check(CLI::NonNegativeNumber);
  s->add_option("--seed", a.seed, "master seed");
  s->add_option("--flip-rule", a.text["flip-rule"], "exponential or linear")
      ->check(CLI::IsMember({"exponential", "linear"}));
}

void add_output_flags(CLI::App* s, Args& a) {
  s->add_option("--out", a.out, "primary output file (default stdout)");
  s->add_option("--json", a.json, "JSON metadata file");
  s->add_option("--plot", a.plot, "SVG plot file");
}

struct Resolved {
  RateMeasure measure;
  GrowthSpec growth;
  SimConfig sim;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError("--config", e.what());
  }
}

Resolved resolve(const CLI::App* sub, Args& a, const std::string& default_preset) {
  auto& t = a.text;
  Preset p = preset(t["preset"].empty() ? default_preset : t["preset"]);
  Json measure = to_json(p.measure);
  Json growth = to_json(p.growth);
  SimConfig sim = p.sim;

  if (!t["config"].empty()) {
    const Json cfg = read_json_file(t["config"]);
    with_flag("--config", [&] {
      if (cfg.contains("preset") && t["preset"].empty()) {
        p = preset(cfg.at("preset").get<std::string>());
        measure = to_json(p.measure);
        growth = to_json(p.growth);
        sim = p.sim;
      }
      if (cfg.contains("measure")) measure.update(cfg.at("measure"));
      if (cfg.contains("growth")) {
        const Json& g = cfg.at("growth");
        if (g.contains("a")) {
          for (const char* k : {"a_lower", "a_upper", "h", "theta", "schedule_direction"}) growth.erase(k);
        } else if (g.contains("a_lower")) {
          growth.erase("a");
        }
        growth.update(g);
      }
      if (cfg.contains("sim")) sim = sim_from_json(cfg.at("sim"), sim);
      return 0;
    });
  }

  if (!t["alpha"].empty()) measure["alpha"] = positive("--alpha", number("--alpha", t["alpha"]));
  if (!t["beta"].empty()) measure["beta"] = positive("--beta", with_flag("--beta", [&] { return parse_rate(t["beta"]); }));
  if (!t["eta"].empty()) measure["eta"] = positive("--eta", number("--eta", t["eta"]));
  const RateMeasure rm = with_flag("--config", [&] { return measure_from_json(measure); });

  std::string growth_flag;
  auto touch = [&](const std::string& flag) {
    if (growth_flag.empty()) growth_flag = flag;
  };
  if (!t["growth"].empty()) {
    touch("--growth");
    growth["kind"] = t["growth"];
  }
  if (!t["r"].empty()) {
    touch("--r");
    growth["r"] = with_flag("--r", [&] { return parse_rate(t["r"]); });
  }
  if (!t["a"].empty()) {
    touch("--a");
    for (const char* k : {"a_lower", "a_upper", "h", "theta", "schedule_direction"}) growth.erase(k);
    growth["a"] = number("--a", t["a"]);
  }
  const std::pair<const char*, const char*> sigmoid_flags[] = {
      {"a-lower", "a_lower"}, {"a-upper", "a_upper"}, {"midpoint", "h"}, {"theta", "theta"},
      {"schedule-direction", "schedule_direction"}};
  for (const auto& [flag, key] : sigmoid_flags) {
    if (t[flag].empty()) continue;
    const std::string name = std::string("--") + flag;
    touch(name);
    growth.erase("a");
    if (std::string(key) == "schedule_direction") {
      growth[key] = t[flag];
    } else if (std::string(key) == "h" || std::string(key) == "theta") {
      growth[key] = with_flag(name, [&] { return parse_duration(t[flag]); });
    } else {
      growth[key] = number(name, t[flag]);
    }
  }
  const GrowthSpec gs = a.no_growth ? GrowthSpec::none() : with_flag(growth_flag.empty() ? "--config" : growth_flag, [&] {
    try {
      return growth_from_json(growth);
    } catch (const Json::exception&) {
      throw std::invalid_argument("an Allee model needs --a, or all of --a-lower, --a-upper, --midpoint and --theta");
    }
  });

  if (!t["dt"].empty()) sim.dt = positive("--dt", with_flag("--dt", [&] { return parse_duration(t["dt"]); }));
  if (!t["t-max"].empty()) sim.horizon = with_flag("--t-max", [&] { return parse_duration(t["t-max"]); });
  if (given(sub, "--steps")) sim.horizon = static_cast<double>(a.steps) * sim.dt;
  if (given(sub, "--seed")) sim.seed = a.seed;
  if (!t["flip-rule"].empty()) sim.flip_rule = parse_flip_rule(t["flip-rule"]);
  with_flag(given(sub, "--steps") ? "--steps" : "--t-max", [&] {
    sim.validate();
    return 0;
  });
  return {rm, gs, sim};
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    std::cout.flush();
  } else {
    write_file(path, contents);
  }
}

/// JSON goes to --json, else next to --out, else nowhere.
std::string json_path(const Args& a) {
  if (!a.json.empty()) return a.json;
  if (!a.out.empty() && a.out != "-") return std::filesystem::path(a.out).replace_extension(".json").string();
  return {};
}

void emit_json(const std::string& path, const Json& j) {
  if (!path.empty()) emit(path, j.dump(2) + "\n");
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream o;
  write_csv(o, header, rows);
  return o.str();
}

std::vector<double> thin(const std::vector<double>& v, std::size_t max_points) {
  if (v.size() <= max_points) return v;
  std::vector<double> out;
  const std::size_t stride = (v.size() + max_points - 1) / max_points;
  for (std::size_t i = 0; i < v.size(); i += stride) out.push_back(v[i]);
  if ((v.size() - 1) % stride != 0) out.push_back(v.back());
  return out;
}

PlotSeries line(std::string label, const std::vector<double>& x, const std::vector<double>& y) {
  constexpr std::size_t kMaxPoints = 2000;
  return {std::move(label), thin(x, kMaxPoints), thin(y, kMaxPoints), false};
}

MicroEngine engine_of(const Args& a) { return parse_engine(a.engine); }
MacroStepper stepper_of(const Args& a) {
  return a.stepper == "exponential" ? MacroStepper::ExponentialIntegrator : MacroStepper::EulerClamp;
}

Json meta(const Resolved& r) {
  return {{"time_unit", "hour"}, {"measure", to_json(r.measure)}, {"growth", to_json(r.growth)}, {"sim", to_json(r.sim)}};
}

// ---- subcommands ----------------------------------------------------------

void cmd_decay(const CLI::App* sub, Args& a) {
  const Resolved r = resolve(sub, a, "case1");
  if (a.points < 2) throw UsageError("--points", "need at least 2");
  const double t_max = r.sim.horizon;
  std::vector<double> ts, closed;
  for (std::size_t k = 0; k < a.points; ++k) {
    const double t = t_max * static_cast<double>(k) / static_cast<double>(a.points - 1);
    ts.push_back(t);
    closed.push_back(laplace_transform(r.measure, t));
  }

  std::vector<std::string> header{"t", "X"};
  std::vector<double> macro;
  if (given(sub, "--M")) {
    const auto lift = build_quantile_lift(r.measure, a.m);
    const Series s = simulate_macro(std::vector<double>(a.m, 1.0), lift, GrowthSpec::none(), r.sim);
    for (double t : ts) {
      const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::llround(t / r.sim.dt)), s.size() - 1);
      macro.push_back(s.x[k]);
    }
    header.push_back("X_hat");
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    rows.push_back({ts[k], closed[k]});
    if (!macro.empty()) rows.back().push_back(macro[k]);
  }
  emit(a.out, csv(header, rows));
  emit_json(json_path(a), meta(r));

  if (!a.plot.empty()) {
    std::vector<PlotSeries> series{line("(1 + beta t)^-alpha", ts, closed)};
    if (!macro.empty()) series.push_back(line("macro, M = " + std::to_string(a.m), ts, macro));
    if (!a.input.empty()) {
      const auto data = with_flag("--input", [&] { return load_dataset(std::filesystem::path(a.input)); });
      series.push_back({"observed", data.times_h, data.average, true});
    }
    emit_plot(series, {PlotKind::Lines, "Decay of the covering ratio"}, a.plot);
  }
}

void cmd_micro(const CLI::App* sub, Args& a) {
  const Resolved r = resolve(sub, a, "sec3.2");
  const std::size_t m = given(sub, "--M") ? a.m : 1024;
  const auto lift = build_quantile_lift(r.measure, m);
  const auto bits = all_ones(m);
  const MicroEngine engine = engine_of(a);
  Json j = meta(r);
  j["M"] = m;
  j["engine"] = to_string(engine);

  if (a.paths == 1) {
    if (!a.dump_sites.empty() && m * (r.sim.steps() / a.record_every + 1) > 50'000'000) {
      throw UsageError("--dump-sites", "dump would exceed 5e7 rows; raise --record-every");
    }
    std::ostringstream dump;
    PathOptions po;
    po.engine = engine;
    po.record_every = a.record_every;
    if (!a.dump_sites.empty()) {
      dump << "t,i,bit\n";
      po.site_observer = [&](double t, std::span<const std::uint8_t> b) {
        const std::string ts = fmt(t);
        for (std::size_t i = 0; i < b.size(); ++i) dump << ts << ',' << i << ',' << int{b[i]} << '\n';
      };
    }
    const Series s = simulate_path(bits, lift, r.growth, r.sim, po);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < s.size(); ++k) rows.push_back({s.t[k], s.x[k]});
    emit(a.out, csv({"t", "X"}, rows));
    if (!a.dump_sites.empty()) emit(a.dump_sites, dump.str());
    j["n_paths"] = 1;
    j["seed"] = r.sim.seed;
    j["terminal"] = s.x.back();
    emit_json(json_path(a), j);
    if (!a.plot.empty()) emit_plot({line("X, M = " + std::to_string(m), s.t, s.x)}, {PlotKind::Lines, "Micro path"}, a.plot);
    return;
  }

  if (!a.dump_sites.empty()) throw UsageError("--dump-sites", "requires --paths 1");
  EnsembleOptions eo;
  eo.engine = engine;
  eo.workers = given(sub, "--workers") ? a.workers : default_workers();
  eo.summary_every = a.record_every;
  const EnsembleResult res = ensemble(bits, lift, r.growth, r.sim, a.paths, eo);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < res.terminal.size(); ++k) rows.push_back({static_cast<double>(k), res.terminal[k]});
  emit(a.out, csv({"path_id", "X_T"}, rows));
  Json summary{{"mean", res.mean.back()}, {"variance", res.variance.back()}, {"n_paths", res.n_paths}, {"seed", res.seed}};
  summary.update(j);
  emit_json(json_path(a), summary);
  if (!a.plot.empty()) {
    emit_plot({line("ensemble mean, " + std::to_string(a.paths) + " paths", res.times, res.mean)},
              {PlotKind::Lines, "Micro ensemble"}, a.plot);
  }
}

void cmd_macro(const CLI::App* sub, Args& a) {
  const Resolved r = resolve(sub, a, "sec3.2");
  if (!(a.init >= 0.0 && a.init <= 1.0)) throw UsageError("--init", "must lie in [0, 1]");
  const std::size_t m = given(sub, "--M") ? a.m : 1024;
  const auto lift = build_quantile_lift(r.measure, m);
  std::ostringstream dump;
  MacroOptions mo;
  mo.stepper = stepper_of(a);
  mo.record_every = a.record_every;
  if (!a.dump_nodes.empty()) {
    dump << "t,R_i,x_hat_i\n";
    mo.node_observer = [&](double t, std::span<const double> rates, std::span<const double> x) {
      const std::string ts = fmt(t);
      for (std::size_t i = 0; i < x.size(); ++i) dump << ts << ',' << fmt(rates[i]) << ',' << fmt(x[i]) << '\n';
    };
  }
  const Series s = simulate_macro(std::vector<double>(m, a.init), lift, r.growth, r.sim, mo);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < s.size(); ++k) rows.push_back({s.t[k], s.x[k]});
  emit(a.out, csv({"t", "X_hat"}, rows));
  if (!a.dump_nodes.empty()) emit(a.dump_nodes, dump.str());
  Json j = meta(r);
  j["M"] = m;
  j["stepper"] = a.stepper;
  j["terminal"] = s.x.back();
  emit_json(json_path(a), j);
  if (!a.plot.empty()) emit_plot({line("X_hat, M = " + std::to_string(m), s.t, s.x)}, {PlotKind::Lines, "Macro model"}, a.plot);
}

void cmd_converge(const CLI::App* sub, Args& a) {
  const Resolved r = resolve(sub, a, "sec3.2");
  if (a.l_min < 0 || a.l_max < a.l_min || a.l_max > 24) throw UsageError("--l-max", "need 0 <= l-min <= l-max <= 24");
  ConvergenceOptions co;
  co.l_min = a.l_min;
  co.l_max = a.l_max;
  co.n_seeds = a.seeds;
  co.engine = engine_of(a);
  const auto report = convergence_study(r.measure, r.growth, r.sim, co);
  std::vector<std::vector<double>> rows;
  Json pts = Json::array();
  for (const auto& p : report.points) {
    rows.push_back({static_cast<double>(p.l), static_cast<double>(p.m), p.er});
    pts.push_back({{"l", p.l}, {"M", p.m}, {"Er", p.er}, {"Er_sd", p.er_sd}, {"Er_min", p.er_min}, {"Er_max", p.er_max}});
  }
  emit(a.out, csv({"l", "M", "Er"}, rows));
  Json j = meta(r);
  j["seeds"] = a.seeds;
  j["points"] = pts;
  if (report.fit) {
    j["fit"] = {{"c", report.fit->c}, {"p", report.fit->p}, {"r_squared", report.fit->r_squared}};
  } else {
    j["fit"] = nullptr;
    j["fit_error"] = report.fit_error;
  }
  emit_json(json_path(a), j);
  if (!a.plot.empty()) {
    std::vector<double> ls, log_er, log_fit;
    for (const auto& p : report.points) {
      ls.push_back(p.l);
      log_er.push_back(std::log2(p.er));
      if (report.fit) log_fit.push_back(std::log2(report.fit->c) - report.fit->p * p.l);
    }
    std::vector<PlotSeries> series{{"log2 Er", ls, log_er, true}};
    if (report.fit) series.push_back(line("least-squares line", ls, log_fit));
    PlotStyle style{PlotKind::Lines, "Micro-macro gap", "l (M = 2^l)", "log2 Er"};
    emit_plot(series, style, a.plot);
  }
}

void cmd_equilibrium(const CLI::App* sub, Args& a) {
  const Resolved r = resolve(sub, a, "sec3.2");
  if (r.growth.kind() != GrowthKind::Allee || !r.growth.schedule().is_constant()) {
    throw UsageError("--a", "equilibrium analysis needs an Allee model with a constant threshold");
  }
  EquilibriumOptions eo;
  eo.grid_points = a.grid;
  if (given(sub, "--M")) eo.profile_nodes = a.m;
  const auto res = solve_equilibrium(r.measure, r.growth, eo);
  Json roots = Json::array();
  for (const auto& root : res.roots) roots.push_back({{"x", root.x}, {"classification", to_string(root.stability)}});
  Json j{{"roots", roots}, {"extinction_only", res.extinction_only}};
  j.update(meta(r));
  j.erase("sim");
  if (!res.extinction_only) {
    j["profile_root"] = res.profile_root;
    j["profile_nodes"] = res.profile.size();
  }
  const std::string path = a.json.empty() ? a.out : a.json;
  emit(path, j.dump(2) + "\n");
  if (!a.dump_nodes.empty() && !res.profile.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < res.profile.size(); ++i) rows.push_back({(*res.lift)[i], res.profile[i]});
    emit(a.dump_nodes, csv({"R_i", "x_hat_i"}, rows));
  }
  if (!a.plot.empty()) {
    std::vector<double> xs, hs, ones;
    for (int k = 1; k <= 400; ++k) {
      xs.push_back(k / 400.0);
      hs.push_back(h_function(k / 400.0, r.measure, r.growth));
      ones.push_back(1.0);
    }
    PlotStyle style{PlotKind::Lines, "Consistency function", "X", "H(X)"};
    emit_plot({line("H(X)", xs, hs), line("1", xs, ones)}, style, a.plot);
  }
}

void cmd_tipping(const CLI::App* sub, Args& a) {
  const Resolved r = resolve(sub, a, "sec3.3");
  if (r.growth.kind() != GrowthKind::Allee) throw UsageError("--growth", "tipping needs an Allee model");
  TippingOptions to;
  to.nodes = given(sub, "--M") ? a.m : 1024;
  if (given(sub, "--threshold")) to.threshold = a.threshold;
  to.stepper = stepper_of(a);
  const double threshold = persistence_threshold(r.growth, to);

  std::map<double, TippingPoint> seen;
  auto classify = [&](double eta) {
    if (!(eta > 0.0)) throw UsageError("--etas", "eta must be positive");
    auto it = seen.find(eta);
    if (it == seen.end()) it = seen.emplace(eta, classify_eta(eta, r.measure, r.growth, r.sim, to)).first;
    return it->second;
  };

  std::vector<double> etas = a.etas;
  if (etas.empty() && a.bisect.empty()) etas = {0.0093, 0.0094};
  std::vector<TippingPoint> sweep;
  for (double eta : etas) sweep.push_back(classify(eta));

  Json j = meta(r);
  j["threshold"] = threshold;
  j["nodes"] = to.nodes;
  j["classification_rule"] = "persistent iff terminal X_hat > threshold";
  j["bracket"] = nullptr;
  if (!a.bisect.empty()) {
    if (a.bisect.size() != 2) throw UsageError("--bisect", "expected lo,hi");
    if (!(a.tol > 0.0)) throw UsageError("--tol", "must be positive");
    const auto br = with_flag("--bisect", [&] {
      return bisect_tipping(a.bisect[0], a.bisect[1], a.tol, [&](double eta) { return classify(eta).fate; });
    });
    j["bracket"] = {br.first, br.second};
    j["tolerance"] = a.tol;
  } else {
    std::sort(sweep.begin(), sweep.end(), [](const auto& x, const auto& y) { return x.eta < y.eta; });
    for (std::size_t i = 1; i < sweep.size(); ++i) {
      if (sweep[i].fate != sweep[i - 1].fate) {
        j["bracket"] = {sweep[i - 1].eta, sweep[i].eta};
        break;
      }
    }
  }

  std::ostringstream o;
  o << "eta,classification,terminal_X\n";
  for (const auto& [eta, p] : seen) o << fmt(eta) << ',' << to_string(p.fate) << ',' << fmt(p.terminal) << '\n';
  emit(a.out, o.str());
  emit_json(json_path(a), j);

  if (!a.plot.empty()) {
    std::vector<PlotSeries> series;
    MacroOptions mo;
    mo.stepper = to.stepper;
    mo.record_every = std::max<std::size_t>(1, r.sim.steps() / 1000);
    for (double eta : etas) {
      const auto lift = build_quantile_lift(r.measure.with_eta(eta), to.nodes);
      const Series s = simulate_macro(std::vector<double>(to.nodes, 1.0), lift, r.growth, r.sim, mo);
      series.push_back(line("eta = " + fmt(eta), s.t, s.x));
    }
    if (series.empty()) throw UsageError("--plot", "needs at least one value in --etas");
    emit_plot(series, {PlotKind::Lines, "Threshold switch response"}, a.plot);
  }
}

void cmd_hist(const CLI::App* sub, Args& a) {
  if (a.text["eta"].empty()) a.text["eta"] = "0.008";
  const Resolved r = resolve(sub, a, "sec3.3");
  const std::size_t m = given(sub, "--M") ? a.m : 128;
  if (a.bins < 2) throw UsageError("--bins", "need at least 2");
  if (!(a.min_share >= 0.0 && a.min_share < 1.0)) throw UsageError("--min-share", "must lie in [0, 1)");
  HistogramOptions ho;
  ho.engine = engine_of(a);
  ho.workers = given(sub, "--workers") ? a.workers : default_workers();
  ho.modes.min_share = a.min_share;
  if (a.lattice_modes) ho.modes.lattice = m;
  const double eta = r.measure.eta();
  const RateMeasure base = r.measure.with_eta(1.0);
  const Histogram h = histogram_ensemble(eta, m, a.hist_paths, a.bins, base, r.growth, r.sim, ho);

  std::vector<std::vector<double>> rows;
  std::vector<double> centers, counts;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    rows.push_back({h.bin_edges[i], h.bin_edges[i + 1], static_cast<double>(h.counts[i])});
    centers.push_back(0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]));
    counts.push_back(static_cast<double>(h.counts[i]));
  }
  emit(a.out, csv({"bin_lo", "bin_hi", "count"}, rows));
  Json j = meta(r);
  j["M"] = m;
  j["n_paths"] = a.hist_paths;
  j["bins"] = a.bins;
  j["modes"] = h.modes;
  j["zero_bin_share"] = static_cast<double>(h.counts.front()) / static_cast<double>(h.total());
  emit_json(json_path(a), j);
  if (!a.plot.empty()) {
    PlotStyle style{PlotKind::Bars, "Terminal X, eta = " + fmt(eta) + ", M = " + std::to_string(m), "X_T", "paths"};
    emit_plot({{"count", centers, counts, false}}, style, a.plot);
  }
}

Json fit_json(const FitResult& f) {
  Json params = Json::object();
  if (f.model == DecayModel::LongMemory) {
    params["alpha"] = f.alpha();
    params["beta"] = f.beta();
  } else {
    params["lambda"] = f.lambda();
  }
  return {{"model", to_string(f.model)},
          {"params", params},
          {"sse", f.sse},
          {"warnings", f.warnings},
          {"converged", f.converged},
          {"rate_unit", "1/hour"}};
}

void cmd_fit(const CLI::App*, Args& a) {
  const DecayDataset data = with_flag("--input", [&]() -> DecayDataset {
    try {
      return load_dataset(std::filesystem::path(a.input));
    } catch (const ParseError& e) {
      throw std::invalid_argument(e.what());
    }
  });
  Json j;
  FitResult primary;
  std::optional<FitResult> secondary;
  if (a.model == "exponential") {
    primary = fit_exponential(data);
    j = fit_json(primary);
  } else if (a.model == "long-memory") {
    primary = fit_long_memory(data);
    j = fit_json(primary);
  } else {
    const FitComparison cmp = compare_fits(data);
    primary = cmp.long_memory;
    secondary = cmp.exponential;
    j = fit_json(primary);
    j["comparison"] = {{"exponential", fit_json(cmp.exponential)},
                       {"sse_ratio", cmp.sse_ratio},
                       {"exponential_misfit_pattern", cmp.exponential_misfit_pattern}};
  }
  emit(a.json, j.dump(2) + "\n");

  if (!a.out.empty()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < data.size(); ++k) rows.push_back({data.times_h[k], data.average[k], primary.fitted[k]});
    emit(a.out, csv({"t", "observed", "fitted"}, rows));
  }
  if (!a.plot.empty()) {
    std::vector<PlotSeries> series{{"observed", data.times_h, data.average, true}};
    std::vector<double> ts;
    const double t_end = data.times_h.back();
    for (int k = 0; k <= 200; ++k) ts.push_back(t_end * k / 200.0);
    auto curve = [&](const FitResult& f) {
      std::vector<double> ys;
      for (double t : ts) {
        ys.push_back(f.model == DecayModel::LongMemory ? long_memory_curve(f.alpha(), f.beta(), t)
                                                       : std::exp(-f.lambda() * t));
      }
      return line(to_string(f.model), ts, ys);
    };
    series.push_back(curve(primary));
    if (secondary) series.push_back(curve(*secondary));
    emit_plot(series, {PlotKind::Lines, "Decay fit"}, a.plot);
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Micro-macro toolkit for benthic algae on abraded riverbeds", "benthic"};
  app.require_subcommand(1, 1);
  Args a;

  using Handler = std::function<void(const CLI::App*, Args&)>;
  std::vector<std::pair<CLI::App*, Handler>> subs;
  auto add = [&](const char* name, const char* desc, Handler h) {
    CLI::App* s = app.add_subcommand(name, desc);
    subs.emplace_back(s, std::move(h));
    return s;
  };
  auto engine_flag = [&](CLI::App* s) {
    s->add_option("--engine", a.engine, "micro engine")->check(CLI::IsMember({"per-site", "skipping"}));
  };
  auto stepper_flag = [&](CLI::App* s) {
    s->add_option("--stepper", a.stepper, "macro stepper")->check(CLI::IsMember({"euler", "exponential"}));
  };
  auto workers_flag = [&](CLI::App* s) {
    s->add_option("--workers", a.workers, "worker threads (default BENTHIC_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
  };

  auto* decay = add("decay", "closed-form and macro decay curves", cmd_decay);
  add_model_flags(decay, a);
  add_sim_flags(decay, a);
  add_output_flags(decay, a);
  decay->add_option("--points", a.points, "output grid size");
  decay->add_option("--M", a.m, "also run the macro model on an M-node lift")->check(CLI::PositiveNumber);
  decay->add_option("--input", a.input, "observed dataset to overlay in the plot")->check(CLI::ExistingFile);

  auto* micro = add("micro", "stochastic micro paths and ensembles", cmd_micro);
  add_model_flags(micro, a);
  add_sim_flags(micro, a);
  add_output_flags(micro, a);
  micro->add_option("--M", a.m, "number of sites")->check(CLI::PositiveNumber);
  micro->add_option("--paths", a.paths, "number of paths")->check(CLI::PositiveNumber);
  micro->add_option("--record-every", a.record_every, "record every k-th step")->check(CLI::PositiveNumber);
  micro->add_option("--dump-sites", a.dump_sites, "per-site CSV t,i,bit");
  engine_flag(micro);
  workers_flag(micro);

  auto* macro = add("macro", "macroscopic model runs", cmd_macro);
  add_model_flags(macro, a);
  add_sim_flags(macro, a);
  add_output_flags(macro, a);
  macro->add_option("--M", a.m, "number of lift nodes")->check(CLI::PositiveNumber);
  macro->add_option("--init", a.init, "initial occupancy at every node");
  macro->add_option("--record-every", a.record_every, "record every k-th step")->check(CLI::PositiveNumber);
  macro->add_option("--dump-nodes", a.dump_nodes, "node CSV t,R_i,x_hat_i");
  stepper_flag(macro);

  auto* converge = add("converge", "micro-macro convergence study", cmd_converge);
  add_model_flags(converge, a);
  add_sim_flags(converge, a);
  add_output_flags(converge, a);
  converge->add_option("--l-min", a.l_min, "smallest l (M = 2^l)");
  converge->add_option("--l-max", a.l_max, "largest l");
  converge->add_option("--seeds", a.seeds, "seeds per l")->check(CLI::PositiveNumber);
  engine_flag(converge);

  auto* equilibrium = add("equilibrium", "stationary equilibria and their stability", cmd_equilibrium);
  add_model_flags(equilibrium, a);
  add_output_flags(equilibrium, a);
  equilibrium->add_option("--M", a.m, "profile nodes")->check(CLI::PositiveNumber);
  equilibrium->add_option("--grid", a.grid, "root scan grid")->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  equilibrium->add_option("--dump-nodes", a.dump_nodes, "stationary profile CSV R_i,x_hat_i");

  auto* tipping = add("tipping", "persistence versus extinction in eta", cmd_tipping);
  add_model_flags(tipping, a);
  add_sim_flags(tipping, a);
  add_output_flags(tipping, a);
  tipping->add_option("--etas", a.etas, "comma-separated multipliers")->delimiter(',');
  tipping->add_option("--bisect", a.bisect, "lo,hi bracket to refine")->delimiter(',')->expected(2);
  tipping->add_option("--tol", a.tol, "bisection width");
  tipping->add_option("--M", a.m, "number of lift nodes")->check(CLI::PositiveNumber);
  tipping->add_option("--threshold", a.threshold, "persistence threshold (default a_lower)");
  stepper_flag(tipping);

  auto* hist = add("hist", "histogram of terminal micro aggregates", cmd_hist);
  add_model_flags(hist, a);
  add_sim_flags(hist, a);
  add_output_flags(hist, a);
  hist->add_option("--M", a.m, "number of sites")->check(CLI::PositiveNumber);
  hist->add_option("--paths", a.hist_paths, "number of paths")->check(CLI::PositiveNumber);
  hist->add_option("--bins", a.bins, "number of bins");
  hist->add_option("--min-share", a.min_share, "minimum share of a mode bin");
  hist->add_flag("--lattice-modes", a.lattice_modes, "compare bins by count per attainable value k/M");
  engine_flag(hist);
  workers_flag(hist);

  auto* fit = add("fit", "fit decay models to a covering-ratio dataset", cmd_fit);
  fit->add_option("--input", a.input, "CSV time_s,avg,h1,...")->required()->check(CLI::ExistingFile);
  fit->add_option("--model", a.model, "both, long-memory or exponential")
      ->check(CLI::IsMember({"both", "long-memory", "exponential"}));
  fit->add_option("--json", a.json, "fit JSON (default stdout)");
  fit->add_option("--out", a.out, "fitted-curve CSV t,observed,fitted");
  fit->add_option("--plot", a.plot, "SVG plot file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\nrun with --help for usage\n";
    return 2;
  }

  try {
    for (auto& [sub, handler] : subs) {
      if (sub->parsed()) handler(sub, a);
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("benthic");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run(static_cast<int>(storage.size()), argv.data());
}

}  // namespace benthic::cli
