#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace benthic {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& message);

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Covering-ratio decay measurements: CSV `time_s,avg,h1,...,hN`.
struct DecayDataset {
  std::vector<double> times_s;
  std::vector<double> times_h;
  std::vector<double> average;
  std::vector<std::vector<double>> series;  // series[j][k]: hemisphere j at time k

  std::size_t size() const noexcept { return times_s.size(); }
};

DecayDataset load_dataset(std::istream& in);
DecayDataset load_dataset(const std::filesystem::path& path);

enum class DecayModel { LongMemory, Exponential };
std::string to_string(DecayModel model);

struct FitResult {
  DecayModel model = DecayModel::LongMemory;
  std::vector<double> params;  // {alpha, beta} or {lambda}; rates per time unit of the input
  double sse = 0.0;
  std::vector<double> fitted;
  std::vector<std::string> warnings;
  bool converged = true;

  double alpha() const { return params.at(0); }
  double beta() const { return params.at(1); }
  double lambda() const { return params.at(0); }
};

double long_memory_curve(double alpha, double beta, double t);

struct LongMemoryFitOptions {
  double alpha_min = 0.01;
  double alpha_max = 2.0;
  double beta_min = 0.01;  // per time unit of the input
  double beta_max = 10.0;
  std::size_t grid = 100;
  std::size_t max_iterations = 20000;
};

/// Log-grid search followed by Nelder-Mead in (log alpha, log beta).
FitResult fit_long_memory(std::span<const double> times, std::span<const double> values,
                          const LongMemoryFitOptions& options = {});
FitResult fit_long_memory(const DecayDataset& data, const LongMemoryFitOptions& options = {});

struct ExponentialFitOptions {
  double log_lambda_min = -6.0;
  double log_lambda_max = 3.0;
  double tolerance = 1e-12;
};

/// Golden-section search on log lambda.
FitResult fit_exponential(std::span<const double> times, std::span<const double> values,
                          const ExponentialFitOptions& options = {});
FitResult fit_exponential(const DecayDataset& data, const ExponentialFitOptions& options = {});

struct FitComparison {
  FitResult long_memory;
  FitResult exponential;
  double sse_ratio = 0.0;  // exponential SSE / long-memory SSE
  /// fitted - observed for the exponential model, at each time.
  std::vector<double> exponential_residuals;
  /// Exponential fit sits above the data at the first positive time and
  /// below it at the last: too little decay early, too much late.
  bool exponential_misfit_pattern = false;
};

FitComparison compare_fits(const DecayDataset& data);

}  // namespace benthic
