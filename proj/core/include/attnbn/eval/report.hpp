#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attnbn/model/network.hpp"
#include "attnbn/scene/raster.hpp"

namespace attnbn::eval {

struct MetricsRow {
  std::string variant;
  double ade = 0.0;
  double fde = 0.0;
  double collision = 0.0;
  std::optional<double> entropy;  // absent for variants without attention
  std::size_t count = 0;
};

struct Evaluation {
  MetricsRow row;
  std::vector<double> ade;      // per example
  std::vector<double> fde;
  std::vector<double> collision;
  std::vector<double> entropy;  // empty without attention
  std::vector<double> alpha_values;  // every attention weight seen, for histograms
};

/// Held-out metrics of a network, averaged over the examples in order.
Evaluation evaluate(const model::Network& network, std::span<const scene::Example> examples,
                    const std::string& variant_label);

/// Extrapolates the last observed displacement over the horizon (agent frame).
std::vector<scene::Pose> constant_velocity_prediction(const scene::Example& example);
/// Same metrics for the constant-velocity extrapolation.
Evaluation evaluate_constant_velocity(std::span<const scene::Example> examples);

struct Interval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap of the mean of paired differences a[i] - b[i].
Interval bootstrap_mean_difference(std::span<const double> a, std::span<const double> b, std::size_t resamples,
                                   std::uint64_t seed, double level = 0.95);

void write_metrics_csv(std::span<const MetricsRow> rows, const std::filesystem::path& path);

struct HistogramSeries {
  std::string label;
  std::span<const double> values;
};

/// Rows "label,bin_lower,bin_upper,count" over `bins` equal bins spanning [0, upper].
void write_histogram_csv(std::span<const HistogramSeries> series, std::size_t bins, double upper,
                         const std::filesystem::path& path);

}  // namespace attnbn::eval
