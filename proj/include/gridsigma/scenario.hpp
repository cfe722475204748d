#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridsigma/grid.hpp"

namespace gridsigma::scenario {

enum class Label { normal, anomaly };

std::string_view to_string(Label label);
Label label_from_string(std::string_view s);

/// Per-bus load multipliers, one row per hour (row-major).
struct LoadProfile {
  std::size_t hours = 0;
  std::size_t bus_count = 0;
  std::vector<double> scale;

  std::span<const double> row(std::size_t hour) const {
    return {scale.data() + hour * bus_count, bus_count};
  }
  void validate() const;

  bool operator==(const LoadProfile&) const = default;
};

/// One system-wide daily sinusoid (period 24 h, amplitude 0.2, mean 1.0)
/// applied to every bus, plus independent N(0, 0.03^2) noise per bus-hour,
/// clamped to [0.6, 1.4].
LoadProfile synth_load_profile(std::size_t hours, std::size_t bus_count, std::uint64_t seed);

/// Header row of bus ids, then one numeric row per hour. Errors name the
/// 1-based data row.
LoadProfile ingest_load_csv(std::string_view csv, std::size_t bus_count);
std::string export_load_csv(const LoadProfile& profile, std::span<const int> bus_ids);

// ---------------------------------------------------------------------------

struct InjectionParams {
  std::size_t k_inject = 3;
  double magnitude = 0.15;
  double floor = 0.05;  // pu
};

struct Injection {
  std::vector<double> features;
  std::vector<std::size_t> injected;  // ascending
  std::vector<double> deltas;  // aligned with `injected`

  bool operator==(const Injection&) const = default;
};

/// x_a = x + a on k distinct uniformly drawn indices, where
/// a = s * max(magnitude * |x|, floor) and s is a fair random sign.
Injection inject_anomaly(std::span<const double> features, std::uint64_t seed,
                         const InjectionParams& params = {});

struct Sample {
  int id = 0;
  int hour = 0;
  Label label = Label::normal;
  std::vector<double> features;
  std::vector<std::size_t> injected;
  std::vector<double> deltas;

  bool operator==(const Sample&) const = default;
};

// ---------------------------------------------------------------------------

inline constexpr double kStdFloor = 1e-12;

struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> std;
  std::size_t n = 0;
  std::string split;

  bool operator==(const FeatureStats&) const = default;
};

/// Population mean and standard deviation per feature.
FeatureStats compute_stats(std::span<const Sample> samples, std::string split = "train");
FeatureStats compute_stats(std::span<const std::vector<double>> rows, std::string split = "train");

/// z[i] = (x[i] - mean[i]) / max(std[i], 1e-12)
std::vector<double> zscores(std::span<const double> features, const FeatureStats& stats);

// ---------------------------------------------------------------------------

struct SplitSizes {
  std::size_t train = 1200;
  std::size_t validation = 200;
  std::size_t test = 200;

  std::size_t total() const noexcept { return train + validation + test; }
  bool operator==(const SplitSizes&) const = default;
};

enum class Split { train, validation, test };
std::string_view to_string(Split split);

struct BuildOptions {
  InjectionParams injection;
  double solver_tol = 1e-10;
  int solver_max_iter = 20;
  /// Meter resolution in pu; every base measurement is rounded to it.
  double resolution = 1e-6;
};

struct Dataset {
  std::vector<Sample> samples;  // samples[i].id == i
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
  grid::FeatureLayout layout;
  FeatureStats stats;
  std::uint64_t master_seed = 0;
  SplitSizes sizes;
  std::vector<int> skipped_hours;

  const Sample& sample(int id) const { return samples.at(static_cast<std::size_t>(id)); }
  const std::vector<int>& ids(Split split) const;
  std::vector<Sample> split_samples(Split split) const;

  bool operator==(const Dataset&) const = default;
};

/// Solves the power flow for one load-scale row and returns the rounded
/// measurement vector.
std::vector<double> measure(const grid::GridCase& grid_case, const grid::FeatureLayout& layout,
                            std::span<const double> load_scale, const BuildOptions& options = {});

/// One base measurement per converged hour (hours in order, non-converging
/// hours skipped and recorded); half of the bases are injected to form the
/// anomaly class; each split is label-balanced; stats come from train only.
Dataset build_dataset(const grid::GridCase& grid_case, const LoadProfile& profile,
                      const grid::FeatureLayout& layout, const SplitSizes& sizes,
                      std::uint64_t seed, const BuildOptions& options = {});

// ---------------------------------------------------------------------------
// Files: dataset.jsonl, stats.json, meta.json, features.csv

std::string sample_to_jsonl(const Sample& sample, Split split);
std::string stats_to_json(const FeatureStats& stats);
FeatureStats stats_from_json(std::string_view text);
std::string features_csv(const Dataset& dataset);

/// Writes all dataset files into `dir` (created if needed); returns the paths.
std::vector<std::filesystem::path> save_dataset(const Dataset& dataset,
                                                const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace gridsigma::scenario
