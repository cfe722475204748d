#include <algorithm>
#include <cmath>

#include "gridsigma/promptkit.hpp"
#include "gridsigma/rng.hpp"

namespace gridsigma::promptkit {
namespace {

// Draws `count` distinct positions from [0, n) in draw order.
std::vector<std::size_t> draw(std::size_t n, std::size_t count, SeededRng& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t k = 0; k < count; ++k) std::swap(pool[k], pool[k + rng.below(n - k)]);
  pool.resize(count);
  return pool;
}

}  // namespace

std::vector<scenario::Sample> select_examples(std::span<const scenario::Sample> train,
                                              const scenario::FeatureStats& stats,
                                              const PromptConfig& config) {
  config.validate();
  const std::size_t k = config.k_examples;
  if (k == 0) return {};

  std::vector<const scenario::Sample*> normals;
  std::vector<const scenario::Sample*> anomalies;
  for (const auto& s : train) {
    (s.label == scenario::Label::anomaly ? anomalies : normals).push_back(&s);
  }
  auto by_id = [](const scenario::Sample* a, const scenario::Sample* b) { return a->id < b->id; };
  std::sort(normals.begin(), normals.end(), by_id);
  std::sort(anomalies.begin(), anomalies.end(), by_id);

  const std::size_t n_anomaly = k / 2;
  const std::size_t n_normal = k - n_anomaly;
  if (normals.size() < n_normal) {
    throw DomainError("need " + std::to_string(n_normal) + " normal examples, train has " +
                      std::to_string(normals.size()));
  }
  if (anomalies.size() < n_anomaly) {
    throw DomainError("need " + std::to_string(n_anomaly) + " anomalous examples, train has " +
                      std::to_string(anomalies.size()));
  }

  SeededRng rng(derive_seed(config.example_seed, "examples", k));
  std::vector<const scenario::Sample*> picked_normals;
  for (auto pos : draw(normals.size(), n_normal, rng)) picked_normals.push_back(normals[pos]);

  std::vector<const scenario::Sample*> picked_anomalies;
  if (config.paradigm == Paradigm::icl) {
    // Spread anomaly strength: bin by max |z| quartile, draw round-robin.
    std::vector<std::pair<double, const scenario::Sample*>> strength;
    for (const auto* s : anomalies) {
      double m = 0.0;
      for (double z : scenario::zscores(s->features, stats)) m = std::max(m, std::fabs(z));
      strength.emplace_back(m, s);
    }
    std::sort(strength.begin(), strength.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
    });
    constexpr std::size_t kBins = 4;
    std::vector<std::vector<const scenario::Sample*>> bins(kBins);
    for (std::size_t i = 0; i < strength.size(); ++i) {
      bins[i * kBins / strength.size()].push_back(strength[i].second);
    }
    for (std::size_t j = 0; j < n_anomaly; ++j) {
      // Fall through to the next non-empty bin when one runs dry.
      for (std::size_t off = 0; off < kBins; ++off) {
        auto& bin = bins[(j + off) % kBins];
        if (bin.empty()) continue;
        const std::size_t pos = rng.below(bin.size());
        picked_anomalies.push_back(bin[pos]);
        bin.erase(bin.begin() + static_cast<std::ptrdiff_t>(pos));
        break;
      }
    }
  } else {
    for (auto pos : draw(anomalies.size(), n_anomaly, rng)) picked_anomalies.push_back(anomalies[pos]);
  }

  std::vector<scenario::Sample> out;
  for (std::size_t i = 0; i < std::max(n_normal, n_anomaly); ++i) {
    if (i < picked_normals.size()) out.push_back(*picked_normals[i]);
    if (i < picked_anomalies.size()) out.push_back(*picked_anomalies[i]);
  }
  return out;
}

}  // namespace gridsigma::promptkit
