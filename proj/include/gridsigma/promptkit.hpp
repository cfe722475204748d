#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridsigma/grid.hpp"
#include "gridsigma/scenario.hpp"

namespace gridsigma::promptkit {

enum class Paradigm { zero_shot, few_shot, icl, finetune_export, hybrid_select };

/// Value Block content, from raw values only up to z-scores only.
enum class Variant { value, mean_std_value, mean_std_value_z, z_only };

std::string_view to_string(Paradigm p);
std::string_view to_string(Variant v);
std::optional<Paradigm> paradigm_from_string(std::string_view s);
std::optional<Variant> variant_from_string(std::string_view s);

inline constexpr double kSigmaThreshold = 3.0;

struct PromptConfig {
  Paradigm paradigm = Paradigm::zero_shot;
  Variant variant = Variant::z_only;
  std::size_t k_examples = 0;
  std::uint64_t example_seed = 0;
  int decimals = 4;
  /// Number of sensors requested by feature-selection prompts.
  std::size_t select_m = 8;

  /// Default k for the paradigm: 0, 2 (few-shot) or 10 (ICL).
  static PromptConfig make(Paradigm paradigm, Variant variant, std::uint64_t example_seed = 0);
  void validate() const;

  bool operator==(const PromptConfig&) const = default;
};

struct PromptBundle {
  std::string text;
  int sample_id = 0;
  PromptConfig config;
  std::vector<int> example_ids;
  std::string content_hash;  // sha256 of text
};

enum class VerdictLabel { normal, anomaly, invalid };
enum class ParseMode { strict, lenient, failed };

std::string_view to_string(VerdictLabel l);
std::string_view to_string(ParseMode m);

struct AgentVerdict {
  VerdictLabel label = VerdictLabel::invalid;
  std::string rationale;
  std::string raw;
  ParseMode parse_mode = ParseMode::failed;
};

// ---------------------------------------------------------------------------
// Rendering

/// Plain-text table: a header row naming the variant's columns, then one row
/// per sensor grouped by sensor kind. Values, means and stds are rounded to
/// `decimals`; |z| is truncated toward zero so the printed value compares
/// against 3.0 exactly as the unrounded one does.
std::string render_value_block(std::span<const double> features,
                               const scenario::FeatureStats& stats,
                               const grid::FeatureLayout& layout, Variant variant,
                               int decimals = 4);

/// Labeled exemplars drawn from `train`: few-shot takes one of each label; ICL
/// takes k/2 anomalies spread over max-|z| quartiles and k - k/2 normals.
/// Ordered normal, anomaly, normal, ...
std::vector<scenario::Sample> select_examples(std::span<const scenario::Sample> train,
                                              const scenario::FeatureStats& stats,
                                              const PromptConfig& config);

/// Role, system context, anomaly rule, optional examples, value block and
/// output format, in that order. For hybrid_select the output format asks for
/// a ranked list of sensor names instead of a label.
PromptBundle render_prompt(const scenario::Sample& sample, const scenario::FeatureStats& stats,
                           const grid::FeatureLayout& layout, const PromptConfig& config,
                           std::span<const scenario::Sample> examples);

// ---------------------------------------------------------------------------
// Reading prompts back (the grammar used by rule-following agents)

struct ValueRow {
  std::string sensor;
  std::optional<double> value;
  std::optional<double> mean;
  std::optional<double> std;
  std::optional<double> abs_z;
};

struct ValueTable {
  std::vector<std::string> columns;  // excluding "sensor"
  std::vector<ValueRow> rows;
};

/// Throws ParseError (line relative to the block) on malformed tables.
ValueTable parse_value_block(std::string_view block);

struct ParsedPrompt {
  bool selection_task = false;
  std::size_t select_m = 0;
  std::vector<std::pair<ValueTable, scenario::Label>> examples;
  ValueTable target;
};

ParsedPrompt parse_prompt(std::string_view text);

// ---------------------------------------------------------------------------

/// Two-line schema: strict when exactly two non-empty lines and the first is
/// a bare label (optionally prefixed "1)" / "Label:"); otherwise the first
/// line mentioning exactly one of the two labels decides (lenient); otherwise
/// invalid.
AgentVerdict parse_verdict(std::string_view raw);

}  // namespace gridsigma::promptkit
