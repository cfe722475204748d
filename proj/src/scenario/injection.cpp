#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridsigma/rng.hpp"
#include "gridsigma/scenario.hpp"

namespace gridsigma::scenario {

Injection inject_anomaly(std::span<const double> features, std::uint64_t seed,
                         const InjectionParams& params) {
  if (params.k_inject > features.size()) {
    throw DomainError("k_inject " + std::to_string(params.k_inject) + " exceeds vector length " +
                      std::to_string(features.size()));
  }
  if (!(params.magnitude > 0.0)) throw DomainError("injection magnitude must be positive");

  SeededRng rng(seed);
  std::vector<std::size_t> pool(features.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::pair<std::size_t, double>> picks;
  for (std::size_t k = 0; k < params.k_inject; ++k) {
    const std::size_t j = k + rng.below(pool.size() - k);
    std::swap(pool[k], pool[j]);
    const std::size_t idx = pool[k];
    const double sign = rng.coin() ? 1.0 : -1.0;
    picks.emplace_back(idx, sign * std::max(params.magnitude * std::fabs(features[idx]), params.floor));
  }
  std::sort(picks.begin(), picks.end());

  Injection out;
  out.features.assign(features.begin(), features.end());
  for (const auto& [idx, delta] : picks) {
    out.features[idx] = features[idx] + delta;
    out.injected.push_back(idx);
    out.deltas.push_back(delta);
  }
  return out;
}

}  // namespace gridsigma::scenario
