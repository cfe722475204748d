#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridsigma/agents.hpp"
#include "gridsigma/detectors.hpp"
#include "gridsigma/promptkit.hpp"
#include "gridsigma/scenario.hpp"

namespace gridsigma::evalkit {

enum class InvalidPolicy { as_wrong, excluded };
std::string_view to_string(InvalidPolicy p);
std::optional<InvalidPolicy> invalid_policy_from_string(std::string_view s);

/// Positive = anomaly.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct ConfusionResult {
  ConfusionCounts counts;
  std::size_t invalid_count = 0;
};

/// as_wrong scores an invalid prediction as the opposite of the truth;
/// excluded drops it.
ConfusionResult confusion(std::span<const promptkit::VerdictLabel> preds,
                          std::span<const scenario::Label> truths, InvalidPolicy policy);

struct MetricsReport {
  std::optional<double> accuracy;
  std::optional<double> recall;
  std::optional<double> precision;
  std::optional<double> f1;
  ConfusionCounts counts;
  std::size_t invalid_count = 0;
  InvalidPolicy invalid_policy = InvalidPolicy::as_wrong;

  bool operator==(const MetricsReport&) const = default;
};

/// Zero denominators leave the metric undefined.
MetricsReport metrics(const ConfusionCounts& c, std::size_t invalid_count = 0,
                      InvalidPolicy policy = InvalidPolicy::as_wrong);
MetricsReport score(std::span<const promptkit::VerdictLabel> preds,
                    std::span<const scenario::Label> truths, InvalidPolicy policy);

std::optional<double> f1_from(double recall, double precision);
/// (new - old) / old
std::optional<double> lift(double old_value, double new_value);

/// "n/a" for undefined, else a percentage with two decimals.
std::string format_metric(const std::optional<double>& v);

// ---------------------------------------------------------------------------

struct RunConfig {
  promptkit::Paradigm paradigm = promptkit::Paradigm::zero_shot;
  promptkit::Variant variant = promptkit::Variant::z_only;
  agents::AgentKind agent = agents::ReferenceRule{};
  std::filesystem::path data_dir;
  std::uint64_t example_seed = 0;
  /// 0 takes the paradigm default.
  std::size_t k_examples = 0;
  std::size_t select_m = 8;
  InvalidPolicy invalid_policy = InvalidPolicy::as_wrong;
  std::optional<agents::EndpointConfig> endpoint;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t mock_parallelism = 4;

  promptkit::PromptConfig prompt_config() const;
  void validate() const;
};

struct SampleRecord {
  int id = 0;
  std::string prompt_hash;
  promptkit::VerdictLabel label = promptkit::VerdictLabel::invalid;
  scenario::Label truth = scenario::Label::normal;
  std::string parse_mode;
};

struct RunOutcome {
  std::string method;  // "llm", "dl" or "hybrid"
  MetricsReport report;  // under the configured policy
  MetricsReport as_wrong;
  MetricsReport excluded;
  std::vector<SampleRecord> samples;
  std::vector<std::string> log;
  std::size_t network_calls = 0;
  std::size_t cache_hits = 0;
  /// Canonical manifest document (stable key order, trailing newline).
  std::string manifest;
};

/// Digest of the dataset's samples, splits and stats.
std::string dataset_digest(const scenario::Dataset& dataset);

/// Prompts every test sample (examples from train), runs the batch and scores
/// against the injection labels. The hybrid paradigm needs `model`; its
/// threshold is calibrated on validation when the model carries none.
RunOutcome run_experiment(const RunConfig& run, const scenario::Dataset& dataset,
                          const detectors::DetectorModel* model = nullptr);

/// Loads the dataset from run.data_dir.
RunOutcome run_experiment(const RunConfig& run);

/// Standalone autoencoder verdicts on the test split.
RunOutcome evaluate_detector(const scenario::Dataset& dataset, const detectors::DetectorModel& model);

// ---------------------------------------------------------------------------

enum class TableKind { variants, paradigms, hybrid };
enum class TableFormat { text, markdown, json };

std::optional<TableKind> table_kind_from_string(std::string_view s);
std::optional<TableFormat> table_format_from_string(std::string_view s);

struct LabeledReport {
  std::string configuration;
  MetricsReport report;
};

/// Row labels for each table, in print order.
std::span<const std::string_view> table_rows(TableKind kind);
std::string_view variant_row_label(promptkit::Variant v);
std::string_view paradigm_row_label(promptkit::Paradigm p);

/// Rows are reordered to the table's canonical order; duplicate or unknown
/// configurations are errors. The hybrid table appends a "Performance lift"
/// row when both of its rows are present.
std::string ablation_table(TableKind kind, std::span<const LabeledReport> reports,
                           TableFormat format);

/// Reads a run manifest and returns its row label for `kind` plus the
/// metrics under the manifest's configured policy.
LabeledReport report_from_manifest(std::string_view manifest_json, TableKind kind);

}  // namespace gridsigma::evalkit
