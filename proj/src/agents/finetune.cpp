#include <cmath>

#include "gridsigma/agents.hpp"
#include "gridsigma/ruleoracle.hpp"
#include "gridsigma/text.hpp"
#include "json.hpp"

namespace gridsigma::agents {

std::string gold_answer(const scenario::Sample& sample, const scenario::FeatureStats& stats,
                        const grid::FeatureLayout& layout) {
  const auto z = scenario::zscores(sample.features, stats);
  const auto rule = ruleoracle::three_sigma_label(z);
  const auto names = layout.names();
  std::string rationale;
  if (rule.label == sample.label) {
    rationale = ruleoracle::rule_rationale(rule, z, names);
  } else if (sample.label == scenario::Label::anomaly) {
    rationale = "sensor " + names[rule.argmax] + " shows the largest deviation (|z|=" +
                text::truncated(rule.max_abs_z, 4) + ") inconsistent with the other measurements";
  } else {
    const std::size_t i = rule.violating.front();
    rationale = "sensor " + names[i] + " |z|=" + text::truncated(std::fabs(z[i]), 4) +
                " exceeds 3.0 but matches normal load variation";
  }
  return std::string(scenario::to_string(sample.label)) + "\n" + rationale;
}

std::string export_finetune_dataset(std::span<const scenario::Sample> train,
                                    const scenario::FeatureStats& stats,
                                    const grid::FeatureLayout& layout,
                                    const promptkit::PromptConfig& config) {
  if (train.empty()) throw DomainError("fine-tune export needs a non-empty train split");
  promptkit::PromptConfig zero_shot = config;
  zero_shot.paradigm = promptkit::Paradigm::zero_shot;
  zero_shot.k_examples = 0;
  std::string out;
  for (const auto& s : train) {
    const auto prompt = promptkit::render_prompt(s, stats, layout, zero_shot, {});
    const nlohmann::json record = {
        {"messages",
         nlohmann::json::array({
             {{"role", "user"}, {"content", prompt.text}},
             {{"role", "assistant"}, {"content", gold_answer(s, stats, layout)}},
         })},
    };
    out += record.dump();
    out += '\n';
  }
  return out;
}

}  // namespace gridsigma::agents
