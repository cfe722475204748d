#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridsigma/promptkit.hpp"
#include "gridsigma/scenario.hpp"

namespace gridsigma::ruleoracle {

struct RuleVerdict {
  scenario::Label label = scenario::Label::normal;
  std::vector<std::size_t> violating;  // ascending indices with |z| >= threshold
  double max_abs_z = 0.0;
  std::size_t argmax = 0;  // first index attaining max_abs_z
};

/// Anomaly iff some |z[i]| >= threshold (inclusive).
RuleVerdict three_sigma_label(std::span<const double> z,
                              double threshold = promptkit::kSigmaThreshold);

/// "sensor <name> |z|=<v> exceeds 3.0" for the first violating sensor, or a
/// one-line summary of the largest |z| when nothing violates.
std::string rule_rationale(const RuleVerdict& verdict, std::span<const double> z,
                           std::span<const std::string> names, int decimals = 4);

/// Executes the prompt's decision procedure on its text: reads the target
/// Value Block, takes |z| from the table or computes it from value/mean/std,
/// inferring mean/std from the available values when they are absent.
/// Detection prompts yield the two-line answer; selection prompts yield the
/// top-m sensor names by |z|, one per line. Throws ParseError on malformed
/// prompts.
std::string reference_completion(std::string_view prompt_text);

/// reference_completion parsed under the output schema; malformed prompts
/// yield an invalid verdict whose rationale carries the diagnostic.
promptkit::AgentVerdict reference_agent(const promptkit::PromptBundle& prompt);

}  // namespace gridsigma::ruleoracle
