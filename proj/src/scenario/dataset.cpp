#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "gridsigma/rng.hpp"
#include "gridsigma/scenario.hpp"

namespace gridsigma::scenario {
namespace {

void shuffle(std::vector<int>& v, std::uint64_t seed) {
  SeededRng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::anomaly ? "anomaly" : "normal";
}

Label label_from_string(std::string_view s) {
  if (s == "normal") return Label::normal;
  if (s == "anomaly") return Label::anomaly;
  throw DomainError("unknown label '" + std::string(s) + "'");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

const std::vector<int>& Dataset::ids(Split split) const {
  switch (split) {
    case Split::train: return train;
    case Split::validation: return validation;
    case Split::test: return test;
  }
  return train;
}

std::vector<Sample> Dataset::split_samples(Split split) const {
  std::vector<Sample> out;
  for (int id : ids(split)) out.push_back(sample(id));
  return out;
}

std::vector<double> measure(const grid::GridCase& grid_case, const grid::FeatureLayout& layout,
                            std::span<const double> load_scale, const BuildOptions& options) {
  grid::SolverOptions so;
  so.tol = options.solver_tol;
  so.max_iter = options.solver_max_iter;
  auto features = grid::extract_features(grid::solve_newton(grid_case, load_scale, so), layout);
  if (options.resolution > 0.0) {
    for (auto& x : features) {
      // "+ 0.0" folds -0.0 into +0.0.
      x = std::round(x / options.resolution) * options.resolution + 0.0;
    }
  }
  return features;
}

Dataset build_dataset(const grid::GridCase& grid_case, const LoadProfile& profile,
                      const grid::FeatureLayout& layout, const SplitSizes& sizes,
                      std::uint64_t seed, const BuildOptions& options) {
  profile.validate();
  if (profile.bus_count != grid_case.buses.size()) {
    throw DomainError("load profile has " + std::to_string(profile.bus_count) +
                      " columns for a " + std::to_string(grid_case.buses.size()) + "-bus case");
  }
  for (std::size_t n : {sizes.train, sizes.validation, sizes.test}) {
    if (n == 0 || n % 2 != 0) throw DomainError("split sizes must be positive and even");
  }
  const std::size_t total = sizes.total();
  if (profile.hours < total) {
    throw DomainError("load profile has " + std::to_string(profile.hours) + " hours; " +
                      std::to_string(total) + " base measurements are required");
  }

  Dataset ds;
  ds.layout = layout;
  ds.master_seed = seed;
  ds.sizes = sizes;

  for (std::size_t h = 0; h < profile.hours && ds.samples.size() < total; ++h) {
    try {
      Sample s;
      s.id = static_cast<int>(ds.samples.size());
      s.hour = static_cast<int>(h);
      s.features = measure(grid_case, layout, profile.row(h), options);
      ds.samples.push_back(std::move(s));
    } catch (const DomainError& e) {
      std::clog << "gridsigma: skipping hour " << h << ": " << e.what() << '\n';
      ds.skipped_hours.push_back(static_cast<int>(h));
    }
  }
  if (ds.samples.size() < total) {
    throw DomainError("only " + std::to_string(ds.samples.size()) +
                      " hours converged; need " + std::to_string(total));
  }

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, derive_seed(seed, "labels"));
  for (std::size_t k = 0; k < total / 2; ++k) {
    Sample& s = ds.samples[static_cast<std::size_t>(order[k])];
    auto inj = inject_anomaly(s.features, derive_seed(seed, "inject", static_cast<std::uint64_t>(s.id)),
                              options.injection);
    s.label = Label::anomaly;
    s.features = std::move(inj.features);
    s.injected = std::move(inj.injected);
    s.deltas = std::move(inj.deltas);
  }

  for (Label label : {Label::normal, Label::anomaly}) {
    std::vector<int> ids;
    for (const auto& s : ds.samples) {
      if (s.label == label) ids.push_back(s.id);
    }
    shuffle(ids, derive_seed(seed, "split", static_cast<std::uint64_t>(label)));
    const auto n_train = static_cast<std::ptrdiff_t>(sizes.train / 2);
    const auto n_val = static_cast<std::ptrdiff_t>(sizes.validation / 2);
    ds.train.insert(ds.train.end(), ids.begin(), ids.begin() + n_train);
    ds.validation.insert(ds.validation.end(), ids.begin() + n_train, ids.begin() + n_train + n_val);
    ds.test.insert(ds.test.end(), ids.begin() + n_train + n_val, ids.end());
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.validation.begin(), ds.validation.end());
  std::sort(ds.test.begin(), ds.test.end());

  ds.stats = compute_stats(ds.split_samples(Split::train), "train");
  return ds;
}

}  // namespace gridsigma::scenario
