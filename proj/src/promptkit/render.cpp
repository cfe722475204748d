#include <sstream>

#include "gridsigma/digest.hpp"
#include "gridsigma/promptkit.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::promptkit {
namespace {

constexpr std::string_view kExamplesMarker = "**Examples**:";
constexpr std::string_view kValueMarker = "**Value Block**:";
constexpr std::string_view kOutputMarker = "**Output Format**";
constexpr std::string_view kSelectPrefix = "List up to ";

std::string_view column_sentence(Variant v) {
  switch (v) {
    case Variant::value: return "the value";
    case Variant::mean_std_value: return "value, mean, and std";
    case Variant::mean_std_value_z: return "value, mean, std, and absolute z-score";
    case Variant::z_only: return "only the absolute z-score";
  }
  return "";
}

}  // namespace

PromptConfig PromptConfig::make(Paradigm paradigm, Variant variant, std::uint64_t example_seed) {
  PromptConfig c;
  c.paradigm = paradigm;
  c.variant = variant;
  c.example_seed = example_seed;
  c.k_examples = paradigm == Paradigm::few_shot ? 2 : paradigm == Paradigm::icl ? 10 : 0;
  return c;
}

void PromptConfig::validate() const {
  switch (paradigm) {
    case Paradigm::few_shot:
      if (k_examples != 2) throw DomainError("few-shot prompts take exactly 2 examples");
      break;
    case Paradigm::icl:
      if (k_examples != 10 && k_examples != 5) throw DomainError("ICL prompts take 10 (or 5) examples");
      break;
    default:
      if (k_examples != 0) {
        throw DomainError(std::string(to_string(paradigm)) + " prompts take no examples");
      }
  }
  if (decimals < 0 || decimals > 12) throw DomainError("decimals must be in [0, 12]");
  if (paradigm == Paradigm::hybrid_select && select_m == 0) {
    throw DomainError("selection prompts need m >= 1");
  }
}

PromptBundle render_prompt(const scenario::Sample& sample, const scenario::FeatureStats& stats,
                           const grid::FeatureLayout& layout, const PromptConfig& config,
                           std::span<const scenario::Sample> examples) {
  config.validate();
  if (examples.size() != config.k_examples) {
    throw DomainError("prompt config expects " + std::to_string(config.k_examples) +
                      " examples, got " + std::to_string(examples.size()));
  }
  const bool selection = config.paradigm == Paradigm::hybrid_select;
  const std::size_t n = layout.size();

  std::ostringstream os;
  os << "**Role Instruction**: You are a power system analyst. ";
  if (selection) {
    os << "Your task is to identify the sensors in the following sample that are the most "
          "relevant indicators of abnormality.\n";
  } else {
    os << "Your task is to determine whether the following sample indicates an anomaly.\n";
  }
  os << "**System Context**: The dataset includes real/reactive power injections (P_i, Q_i), "
        "line power flows (P_ij, Q_ij), and bus voltage magnitudes (V), with "
     << n << " features per sample.\n";
  os << "**Anomaly Rule**: 3-sigma\n"
     << "- You will receive " << n << " sensor values.\n"
     << "- If the mean, std, or z-score is not provided, you must infer them from the available "
        "values before making a decision.\n"
     << "- Decision procedure:\n"
     << "  - For each measurement i, compute z-score = (value - mean) / std, where "
        "std := max(std, 1e-12).\n"
     << "  - Label as \"anomaly\" if at least one measurement satisfies |z| >= 3.0; otherwise, "
        "label as \"normal\".\n"
     << "  - The Value Block below includes " << column_sentence(config.variant)
     << " for each measurement, grouped by task category.\n";

  PromptBundle bundle;
  bundle.sample_id = sample.id;
  bundle.config = config;
  if (!examples.empty()) {
    os << kExamplesMarker << '\n';
    for (std::size_t k = 0; k < examples.size(); ++k) {
      os << "Example " << (k + 1) << ":\n"
         << render_value_block(examples[k].features, stats, layout, config.variant, config.decimals)
         << "Label: " << scenario::to_string(examples[k].label) << '\n';
      bundle.example_ids.push_back(examples[k].id);
    }
  }
  os << kValueMarker << '\n'
     << render_value_block(sample.features, stats, layout, config.variant, config.decimals);
  if (selection) {
    os << kOutputMarker << ": " << kSelectPrefix << config.select_m
       << " sensor names, most suspicious first, one per line. Use the names exactly as "
          "written in the Value Block and output nothing else.\n";
  } else {
    os << kOutputMarker << " (must be exactly two lines):\n"
       << "1) Label: normal OR anomaly (1 word only)\n"
       << "2) Brief explanation for the classification\n";
  }
  os << "**Answer**:\n";

  bundle.text = os.str();
  bundle.content_hash = sha256_hex(bundle.text);
  return bundle;
}

ParsedPrompt parse_prompt(std::string_view prompt) {
  const auto value_pos = prompt.find(kValueMarker);
  if (value_pos == std::string_view::npos) throw ParseError("prompt has no Value Block", 0);
  const auto output_pos = prompt.find(kOutputMarker, value_pos);
  if (output_pos == std::string_view::npos) throw ParseError("prompt has no Output Format", 0);

  ParsedPrompt parsed;
  const auto block_start = value_pos + kValueMarker.size();
  parsed.target = parse_value_block(prompt.substr(block_start, output_pos - block_start));

  const auto output_line_end = prompt.find('\n', output_pos);
  const auto output_line = prompt.substr(output_pos, output_line_end - output_pos);
  if (const auto sel = output_line.find(kSelectPrefix); sel != std::string_view::npos) {
    parsed.selection_task = true;
    const auto rest = output_line.substr(sel + kSelectPrefix.size());
    long long m = 0;
    if (!text::parse_int(rest.substr(0, rest.find(' ')), m) || m < 1) {
      throw ParseError("selection prompt has no sensor count", 0);
    }
    parsed.select_m = static_cast<std::size_t>(m);
  }

  const auto examples_pos = prompt.find(kExamplesMarker);
  if (examples_pos != std::string_view::npos && examples_pos < value_pos) {
    const auto body =
        prompt.substr(examples_pos + kExamplesMarker.size(), value_pos - examples_pos - kExamplesMarker.size());
    std::string current;
    bool in_example = false;
    for (const auto& line : text::split_lines(body)) {
      const auto t = text::trim(line);
      if (t.empty()) continue;
      if (t.starts_with("Example ") && t.ends_with(':')) {
        if (in_example) throw ParseError("example without label", 0);
        in_example = true;
        current.clear();
      } else if (t.starts_with("Label:")) {
        if (!in_example) throw ParseError("label outside an example", 0);
        const auto label = text::trim(t.substr(6));
        parsed.examples.emplace_back(parse_value_block(current),
                                     scenario::label_from_string(label));
        in_example = false;
      } else {
        if (!in_example) throw ParseError("text outside an example", 0);
        current += line;
        current += '\n';
      }
    }
    if (in_example) throw ParseError("example without label", 0);
  }
  return parsed;
}

}  // namespace gridsigma::promptkit
