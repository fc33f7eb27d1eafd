#include "benthic/calibrate.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace benthic {

ParseError::ParseError(std::size_t row, std::size_t column, const std::string& message)
    : std::runtime_error("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + message),
      row_(row),
      column_(column) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& text, std::size_t row, std::size_t col) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw ParseError(row, col, "not a number: '" + text + "'");
  }
  return value;
}

double sse_of(std::span<const double> values, std::span<const double> fitted) {
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) s += (values[k] - fitted[k]) * (values[k] - fitted[k]);
  return s;
}

void require_series(std::span<const double> times, std::span<const double> values, std::size_t min_points,
                    const char* who) {
  if (times.size() != values.size()) throw std::invalid_argument(std::string(who) + ": times and values differ in length");
  if (times.size() < min_points) {
    throw std::domain_error(std::string(who) + ": need at least " + std::to_string(min_points) + " points");
  }
}

}  // namespace

DecayDataset load_dataset(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    header = split_csv(line);
  }
  if (header.empty()) throw ParseError(row, 1, "missing header");
  if (header.size() < 3) throw ParseError(row, header.size() + 1, "header needs time_s, avg and at least one hemisphere");
  if (header[0] != "time_s") throw ParseError(row, 1, "expected 'time_s', found '" + header[0] + "'");
  if (header[1] != "avg") throw ParseError(row, 2, "expected 'avg', found '" + header[1] + "'");
  for (std::size_t j = 2; j < header.size(); ++j) {
    const std::string expected = "h" + std::to_string(j - 1);
    if (header[j] != expected) throw ParseError(row, j + 1, "expected '" + expected + "', found '" + header[j] + "'");
  }

  const std::size_t n_series = header.size() - 2;
  DecayDataset data;
  data.series.resize(n_series);
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ParseError(row, std::min(cells.size(), header.size()) + 1,
                       "expected " + std::to_string(header.size()) + " columns, found " + std::to_string(cells.size()));
    }
    const double t = parse_cell(cells[0], row, 1);
    if (data.times_s.empty() ? t != 0.0 : !(t > data.times_s.back())) {
      throw ParseError(row, 1, "times must start at 0 and strictly increase");
    }
    std::vector<double> values;
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const double v = parse_cell(cells[j], row, j + 1);
      if (!(v >= 0.0 && v <= 1.0)) throw ParseError(row, j + 1, "covering ratio outside [0, 1]");
      values.push_back(v);
    }
    if (data.times_s.empty() && values[0] != 1.0) throw ParseError(row, 2, "average at t = 0 must equal 1");
    const double row_mean = std::accumulate(values.begin() + 1, values.end(), 0.0) / static_cast<double>(n_series);
    if (std::abs(row_mean - values[0]) > 1e-3 + 1e-12) {
      throw ParseError(row, 2, "average differs from the hemisphere mean by more than 1e-3");
    }
    data.times_s.push_back(t);
    data.times_h.push_back(t / 3600.0);
    data.average.push_back(values[0]);
    for (std::size_t j = 0; j < n_series; ++j) data.series[j].push_back(values[j + 1]);
  }
  if (data.times_s.empty()) throw ParseError(row + 1, 1, "no data rows");
  return data;
}

DecayDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  return load_dataset(in);
}

std::string to_string(DecayModel model) { return model == DecayModel::LongMemory ? "long-memory" : "exponential"; }

double long_memory_curve(double alpha, double beta, double t) { return std::pow(1.0 + beta * t, -alpha); }

namespace {

using Point2 = std::array<double, 2>;

struct SimplexOutcome {
  Point2 x;
  double f;
  bool converged;
};

template <class F>
SimplexOutcome nelder_mead(F&& f, Point2 start, Point2 step, std::size_t max_iterations) {
  std::array<Point2, 3> v{start, start, start};
  v[1][0] += step[0];
  v[2][1] += step[1];
  std::array<double, 3> fv{f(v[0]), f(v[1]), f(v[2])};

  auto order = [&] {
    std::array<std::size_t, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::array<Point2, 3> nv{v[idx[0]], v[idx[1]], v[idx[2]]};
    std::array<double, 3> nf{fv[idx[0]], fv[idx[1]], fv[idx[2]]};
    v = nv;
    fv = nf;
  };
  auto size = [&] {
    double s = 0.0;
    for (int i = 1; i < 3; ++i) {
      for (int d = 0; d < 2; ++d) s = std::max(s, std::abs(v[i][d] - v[0][d]));
    }
    return s;
  };
  auto along = [](const Point2& c, const Point2& w, double coef) {
    return Point2{c[0] + coef * (w[0] - c[0]), c[1] + coef * (w[1] - c[1])};
  };

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    order();
    if (size() < 1e-11) return {v[0], fv[0], true};
    const Point2 centroid{0.5 * (v[0][0] + v[1][0]), 0.5 * (v[0][1] + v[1][1])};
    const Point2 reflected = along(centroid, v[2], -1.0);
    const double fr = f(reflected);
    if (fr < fv[0]) {
      const Point2 expanded = along(centroid, v[2], -2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        v[2] = expanded;
        fv[2] = fe;
      } else {
        v[2] = reflected;
        fv[2] = fr;
      }
    } else if (fr < fv[1]) {
      v[2] = reflected;
      fv[2] = fr;
    } else {
      const bool outside = fr < fv[2];
      const Point2 contracted = along(centroid, outside ? reflected : v[2], 0.5);
      const double fc = f(contracted);
      if (fc < (outside ? fr : fv[2])) {
        v[2] = contracted;
        fv[2] = fc;
      } else {
        for (int i = 1; i < 3; ++i) {
          v[i] = along(v[0], v[i], 0.5);
          fv[i] = f(v[i]);
        }
      }
    }
  }
  order();
  return {v[0], fv[0], false};
}

}  // namespace

FitResult fit_long_memory(std::span<const double> times, std::span<const double> values,
                          const LongMemoryFitOptions& options) {
  require_series(times, values, 3, "fit_long_memory");
  if (options.grid < 2) throw std::domain_error("fit_long_memory: grid needs at least 2 points per axis");

  auto sse_log = [&](const Point2& p) {
    const double alpha = std::exp(p[0]);
    const double beta = std::exp(p[1]);
    double s = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double d = values[k] - long_memory_curve(alpha, beta, times[k]);
      s += d * d;
    }
    return s;
  };

  const double la0 = std::log(options.alpha_min), la1 = std::log(options.alpha_max);
  const double lb0 = std::log(options.beta_min), lb1 = std::log(options.beta_max);
  const double da = (la1 - la0) / static_cast<double>(options.grid - 1);
  const double db = (lb1 - lb0) / static_cast<double>(options.grid - 1);
  Point2 best{la0, lb0};
  double best_f = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < options.grid; ++i) {
    for (std::size_t j = 0; j < options.grid; ++j) {
      const Point2 p{la0 + da * static_cast<double>(i), lb0 + db * static_cast<double>(j)};
      const double f = sse_log(p);
      if (f < best_f) {
        best_f = f;
        best = p;
      }
    }
  }

  const auto outcome = nelder_mead(sse_log, best, {da, db}, options.max_iterations);
  FitResult fit;
  fit.model = DecayModel::LongMemory;
  fit.params = {std::exp(outcome.x[0]), std::exp(outcome.x[1])};
  for (double t : times) fit.fitted.push_back(long_memory_curve(fit.params[0], fit.params[1], t));
  fit.sse = sse_of(values, fit.fitted);
  fit.converged = outcome.converged;
  if (!outcome.converged) fit.warnings.push_back("simplex search hit the iteration cap; returning best point found");
  return fit;
}

FitResult fit_long_memory(const DecayDataset& data, const LongMemoryFitOptions& options) {
  return fit_long_memory(data.times_h, data.average, options);
}

FitResult fit_exponential(std::span<const double> times, std::span<const double> values,
                          const ExponentialFitOptions& options) {
  require_series(times, values, 2, "fit_exponential");
  auto sse_log = [&](double log_lambda) {
    const double lambda = std::exp(log_lambda);
    double s = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double d = values[k] - std::exp(-lambda * times[k]);
      s += d * d;
    }
    return s;
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = options.log_lambda_min;
  double b = options.log_lambda_max;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = sse_log(c);
  double fd = sse_log(d);
  while (b - a > options.tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = sse_log(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = sse_log(d);
    }
  }
  const double log_lambda = 0.5 * (a + b);

  FitResult fit;
  fit.model = DecayModel::Exponential;
  fit.params = {std::exp(log_lambda)};
  for (double t : times) fit.fitted.push_back(std::exp(-fit.params[0] * t));
  fit.sse = sse_of(values, fit.fitted);
  const double edge = 1e-6;
  if (log_lambda - options.log_lambda_min < edge || options.log_lambda_max - log_lambda < edge) {
    fit.warnings.push_back("decay rate at the search bound");
    fit.converged = false;
  }
  return fit;
}

FitResult fit_exponential(const DecayDataset& data, const ExponentialFitOptions& options) {
  return fit_exponential(data.times_h, data.average, options);
}

FitComparison compare_fits(const DecayDataset& data) {
  FitComparison out;
  out.long_memory = fit_long_memory(data);
  out.exponential = fit_exponential(data);
  out.sse_ratio = out.long_memory.sse > 0.0 ? out.exponential.sse / out.long_memory.sse
                                            : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < data.size(); ++k) {
    out.exponential_residuals.push_back(out.exponential.fitted[k] - data.average[k]);
  }
  std::size_t first = 0;
  while (first < data.size() && data.times_h[first] <= 0.0) ++first;
  if (first < data.size()) {
    out.exponential_misfit_pattern =
        out.exponential_residuals[first] > 0.0 && out.exponential_residuals.back() < 0.0;
  }
  return out;
}

}  // namespace benthic
