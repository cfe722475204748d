#include <algorithm>
#include <cmath>

#include "gridsigma/scenario.hpp"

namespace gridsigma::scenario {
namespace {

template <typename RowAt>
FeatureStats stats_impl(std::size_t count, RowAt row_at, std::string split) {
  if (count == 0) throw DomainError("cannot compute stats of an empty sample list");
  const std::size_t dim = row_at(0).size();
  FeatureStats s;
  s.mean.assign(dim, 0.0);
  s.std.assign(dim, 0.0);
  s.n = count;
  s.split = std::move(split);
  for (std::size_t r = 0; r < count; ++r) {
    const auto& row = row_at(r);
    if (row.size() != dim) throw DomainError("feature length mismatch in stats input");
    for (std::size_t i = 0; i < dim; ++i) s.mean[i] += row[i];
  }
  const double n = static_cast<double>(count);
  for (auto& m : s.mean) m /= n;
  // Two-pass variance for accuracy.
  for (std::size_t r = 0; r < count; ++r) {
    const auto& row = row_at(r);
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = row[i] - s.mean[i];
      s.std[i] += d * d;
    }
  }
  for (auto& v : s.std) v = std::sqrt(v / n);
  return s;
}

}  // namespace

FeatureStats compute_stats(std::span<const Sample> samples, std::string split) {
  return stats_impl(
      samples.size(), [&](std::size_t r) -> const std::vector<double>& { return samples[r].features; },
      std::move(split));
}

FeatureStats compute_stats(std::span<const std::vector<double>> rows, std::string split) {
  return stats_impl(
      rows.size(), [&](std::size_t r) -> const std::vector<double>& { return rows[r]; },
      std::move(split));
}

std::vector<double> zscores(std::span<const double> features, const FeatureStats& stats) {
  if (features.size() != stats.mean.size() || features.size() != stats.std.size()) {
    throw DomainError("feature length " + std::to_string(features.size()) +
                      " does not match stats length " + std::to_string(stats.mean.size()));
  }
  std::vector<double> z(features.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = (features[i] - stats.mean[i]) / std::max(stats.std[i], kStdFloor);
  }
  return z;
}

}  // namespace gridsigma::scenario
