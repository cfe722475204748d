#include "support.hpp"

namespace testsupport {

using namespace gridsigma;

const scenario::Dataset& default_dataset() {
  static const scenario::Dataset ds = [] {
    const auto grid_case = grid::builtin_ieee14();
    const auto profile = scenario::synth_load_profile(1800, grid_case.buses.size(), kSeed);
    return scenario::build_dataset(grid_case, profile, grid::default_layout(grid_case), {}, kSeed);
  }();
  return ds;
}

const detectors::DetectorModel& trained_model() {
  static const detectors::DetectorModel model = [] {
    const auto& ds = default_dataset();
    std::vector<scenario::Sample> normals;
    std::vector<scenario::Sample> val_normals;
    for (const auto& s : ds.split_samples(scenario::Split::train)) {
      if (s.label == scenario::Label::normal) normals.push_back(s);
    }
    const auto validation = ds.split_samples(scenario::Split::validation);
    for (const auto& s : validation) {
      if (s.label == scenario::Label::normal) val_normals.push_back(s);
    }
    auto m = detectors::train_autoencoder(normals, val_normals, ds.stats, {}, kSeed).model;
    m.threshold = detectors::calibrate_threshold(m, validation);
    m.hybrid_threshold = detectors::calibrate_hybrid(m, validation, ds.stats, 8);
    return m;
  }();
  return model;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(GRIDSIGMA_SCRATCH_DIR) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path golden_dir() { return std::filesystem::path(GRIDSIGMA_TEST_SOURCE_DIR) / "golden"; }

}  // namespace testsupport
