#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "gridsigma/detectors.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::detectors {
namespace {

std::string_view strip_list_marker(std::string_view line) {
  line = text::trim(line);
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
    line.remove_prefix(i + 1);
  } else if (!line.empty() && (line[0] == '-' || line[0] == '*')) {
    line.remove_prefix(1);
  }
  line = text::trim(line);
  while (!line.empty() && (line.front() == '`' || line.front() == '"' || line.front() == '*')) line.remove_prefix(1);
  while (!line.empty() && (line.back() == '`' || line.back() == '"' || line.back() == '*' ||
                           line.back() == ',' || line.back() == '.')) {
    line.remove_suffix(1);
  }
  return text::trim(line);
}

}  // namespace

std::string_view to_string(SelectionSource s) {
  switch (s) {
    case SelectionSource::llm: return "llm";
    case SelectionSource::reference_topz: return "reference_topz";
    case SelectionSource::full: return "full";
  }
  return "full";
}

FeatureSelection reference_selector(std::span<const double> z, std::size_t m) {
  if (m == 0) throw DomainError("selection size m must be at least 1");
  // Ranked at the resolution a selection prompt prints, so a reader of the
  // prompt can reproduce the order exactly.
  const int decimals = promptkit::PromptConfig{}.decimals;
  std::vector<double> key(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    text::parse_double(text::truncated(std::abs(z[i]), decimals), key[i]);
  }
  std::vector<std::size_t> order(z.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  order.resize(std::min(m, order.size()));
  return {0, std::move(order), SelectionSource::reference_topz};
}

std::vector<std::size_t> parse_selection(std::string_view reply, const grid::FeatureLayout& layout,
                                         std::size_t m) {
  std::vector<std::size_t> out;
  std::set<std::size_t> seen;
  for (auto line : text::split_lines(reply)) {
    if (out.size() >= m) break;
    const auto name = strip_list_marker(line);
    if (name.empty()) continue;
    const auto idx = layout.find(name);
    if (idx && seen.insert(*idx).second) out.push_back(*idx);
  }
  return out;
}

promptkit::PromptBundle selection_prompt(const scenario::Sample& sample,
                                         const scenario::FeatureStats& stats,
                                         const grid::FeatureLayout& layout, std::size_t m) {
  auto config = promptkit::PromptConfig::make(promptkit::Paradigm::hybrid_select,
                                              promptkit::Variant::z_only);
  config.select_m = m;
  return promptkit::render_prompt(sample, stats, layout, config, {});
}

FeatureSelection selection_from_reply(int sample_id, const std::optional<std::string>& reply,
                                      const grid::FeatureLayout& layout, std::size_t m,
                                      std::vector<std::string>* log) {
  FeatureSelection sel;
  sel.sample_id = sample_id;
  if (reply) sel.ranked = parse_selection(*reply, layout, m);
  if (sel.ranked.empty()) {
    sel.source = SelectionSource::full;
    if (log) {
      log->push_back("sample " + std::to_string(sample_id) + ": " +
                     (reply ? "no known sensor names in reply" : "no reply") +
                     ", scoring all features");
    }
  } else {
    sel.source = SelectionSource::llm;
  }
  return sel;
}

FeatureSelection llm_select_features(const scenario::Sample& sample,
                                     const scenario::FeatureStats& stats,
                                     const grid::FeatureLayout& layout,
                                     const agents::AgentKind& agent,
                                     const agents::EndpointConfig* endpoint,
                                     agents::CompletionCache* cache, std::size_t m,
                                     std::vector<std::string>* log) {
  const auto prompt = selection_prompt(sample, stats, layout, m);
  const auto result = agents::complete(prompt, agent, endpoint, cache);
  if (!result.text && log) log->push_back("sample " + std::to_string(sample.id) + ": " + result.error);
  return selection_from_reply(sample.id, result.text, layout, m, log);
}

double hybrid_score(const DetectorModel& model, const FeatureSelection& selection,
                    std::span<const double> features) {
  const auto rec = reconstruction_error(model, features);
  if (selection.source == SelectionSource::full) return rec.total;
  if (selection.ranked.empty()) throw DomainError("empty feature selection");
  double sum = 0.0;
  for (auto i : selection.ranked) {
    if (i >= rec.residuals.size()) throw DomainError("selected feature index out of range");
    sum += rec.residuals[i];
  }
  return sum / static_cast<double>(selection.ranked.size());
}

scenario::Label hybrid_detect(const DetectorModel& model, const FeatureSelection& selection,
                              double threshold, std::span<const double> features) {
  return hybrid_score(model, selection, features) >= threshold ? scenario::Label::anomaly
                                                               : scenario::Label::normal;
}

double calibrate_hybrid(const DetectorModel& model, std::span<const scenario::Sample> validation,
                        const scenario::FeatureStats& stats, std::size_t m) {
  std::vector<double> scores;
  std::vector<scenario::Label> truths;
  for (const auto& s : validation) {
    const auto sel = reference_selector(scenario::zscores(s.features, stats), m);
    scores.push_back(hybrid_score(model, sel, s.features));
    truths.push_back(s.label);
  }
  return calibrate_threshold(scores, truths);
}

}  // namespace gridsigma::detectors
