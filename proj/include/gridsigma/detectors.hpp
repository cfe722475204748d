#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridsigma/agents.hpp"
#include "gridsigma/scenario.hpp"

namespace gridsigma::detectors {

struct TrainHyper {
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t epochs = 200;
  std::size_t patience = 20;
};

inline const std::vector<std::size_t> kDefaultHiddenDims = {32, 8, 32};

/// Dense autoencoder: tanh on hidden layers, identity output, scored by the
/// squared residual between output and standardized input.
struct DetectorModel {
  std::vector<std::size_t> layer_dims;
  std::vector<Eigen::MatrixXd> weights;  // weights[l] is dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;
  scenario::FeatureStats input_stats;
  std::optional<double> threshold;
  std::optional<double> hybrid_threshold;
  std::size_t hybrid_m = 8;
  std::uint64_t train_seed = 0;

  /// Columns of `x` are standardized samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd standardize(std::span<const scenario::Sample> samples) const;
  void validate() const;

  bool operator==(const DetectorModel&) const = default;
};

/// Glorot-uniform weights, zero biases.
DetectorModel init_model(std::vector<std::size_t> layer_dims, scenario::FeatureStats input_stats,
                         std::uint64_t seed);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean squared reconstruction error over all entries of `x` (columns are
/// standardized samples) and its gradient.
double loss_and_gradient(const DetectorModel& model, const Eigen::MatrixXd& x, Gradients* grad);

struct TrainReport {
  double initial_loss = 0.0;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> validation_loss;
  std::size_t best_epoch = 0;
};

struct TrainResult {
  DetectorModel model;
  TrainReport report;
};

/// Adam on mean-squared reconstruction loss over `normals`, early stopping
/// on `validation_normals` (best weights restored). Deterministic in seed.
TrainResult train_autoencoder(std::span<const scenario::Sample> normals,
                              std::span<const scenario::Sample> validation_normals,
                              const scenario::FeatureStats& input_stats, const TrainHyper& hyper,
                              std::uint64_t seed,
                              const std::vector<std::size_t>& hidden_dims = kDefaultHiddenDims);

struct Reconstruction {
  std::vector<double> residuals;  // (x_hat[i] - x_std[i])^2
  double total = 0.0;  // mean of residuals
};

Reconstruction reconstruction_error(const DetectorModel& model, std::span<const double> features);

/// Threshold maximizing F1 of (score >= t -> anomaly); ties go to the
/// smaller t. Needs both labels present.
double calibrate_threshold(std::span<const double> scores, std::span<const scenario::Label> truths);
double calibrate_threshold(const DetectorModel& model, std::span<const scenario::Sample> validation);

scenario::Label detect(const DetectorModel& model, std::span<const double> features);

// ---------------------------------------------------------------------------
// Feature selection and the hybrid detector

enum class SelectionSource { llm, reference_topz, full };
std::string_view to_string(SelectionSource s);

struct FeatureSelection {
  int sample_id = 0;
  std::vector<std::size_t> ranked;
  SelectionSource source = SelectionSource::full;
};

/// Indices of the m largest |z|, descending, compared at prompt resolution
/// (truncated to four decimals); ties to the lower index.
FeatureSelection reference_selector(std::span<const double> z, std::size_t m);

/// Sensor names, one per line (bullets and numbering tolerated); unknown and
/// repeated names dropped; at most m kept.
std::vector<std::size_t> parse_selection(std::string_view reply, const grid::FeatureLayout& layout,
                                         std::size_t m);

/// Builds the selection prompt for a sample.
promptkit::PromptBundle selection_prompt(const scenario::Sample& sample,
                                         const scenario::FeatureStats& stats,
                                         const grid::FeatureLayout& layout, std::size_t m);

/// Turns one agent reply (or failure) into a selection; empty results fall
/// back to the full feature set and are noted in `log`.
FeatureSelection selection_from_reply(int sample_id, const std::optional<std::string>& reply,
                                      const grid::FeatureLayout& layout, std::size_t m,
                                      std::vector<std::string>* log);

FeatureSelection llm_select_features(const scenario::Sample& sample,
                                     const scenario::FeatureStats& stats,
                                     const grid::FeatureLayout& layout,
                                     const agents::AgentKind& agent,
                                     const agents::EndpointConfig* endpoint,
                                     agents::CompletionCache* cache, std::size_t m,
                                     std::vector<std::string>* log = nullptr);

/// Mean squared residual over the selected features (all features for a
/// full selection).
double hybrid_score(const DetectorModel& model, const FeatureSelection& selection,
                    std::span<const double> features);

scenario::Label hybrid_detect(const DetectorModel& model, const FeatureSelection& selection,
                              double threshold, std::span<const double> features);

/// Calibrates the hybrid threshold on `validation` with the reference
/// selector over z-scores from `stats`.
double calibrate_hybrid(const DetectorModel& model, std::span<const scenario::Sample> validation,
                        const scenario::FeatureStats& stats, std::size_t m);

// ---------------------------------------------------------------------------

std::string model_to_json(const DetectorModel& model);
DetectorModel model_from_json(std::string_view text);

}  // namespace gridsigma::detectors
