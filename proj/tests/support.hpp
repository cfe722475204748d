#pragma once

#include <filesystem>
#include <string>

#include "gridsigma/detectors.hpp"
#include "gridsigma/grid.hpp"
#include "gridsigma/scenario.hpp"

namespace testsupport {

inline constexpr std::uint64_t kSeed = 42;

/// The 1600-sample seed-42 dataset on the built-in 14-bus case, built once.
const gridsigma::scenario::Dataset& default_dataset();

/// Autoencoder trained on default_dataset() with seed 42, calibrated
/// (threshold and hybrid threshold with m = 8).
const gridsigma::detectors::DetectorModel& trained_model();

/// Fresh empty directory under the build tree.
std::filesystem::path scratch_dir(const std::string& name);

std::filesystem::path golden_dir();

}  // namespace testsupport
