#include <cctype>

#include "gridsigma/promptkit.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::promptkit {
namespace {

std::string_view strip_prefix_ci(std::string_view s, std::string_view prefix) {
  s = text::trim(s);
  if (text::starts_with_ci(s, prefix)) return text::trim(s.substr(prefix.size()));
  return s;
}

// Bare label after removing list markers, "Label:", emphasis and a final period.
std::optional<VerdictLabel> bare_label(std::string_view line) {
  auto s = strip_prefix_ci(line, "1)");
  s = strip_prefix_ci(s, "label:");
  while (!s.empty() && (s.front() == '*' || s.front() == '"' || s.front() == '\'')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '*' || s.back() == '"' || s.back() == '\'' || s.back() == '.')) {
    s.remove_suffix(1);
  }
  const auto word = text::lower(text::trim(s));
  if (word == "normal") return VerdictLabel::normal;
  if (word == "anomaly") return VerdictLabel::anomaly;
  return std::nullopt;
}

// Whole-word mentions, so "abnormal" does not count as "normal".
std::pair<bool, bool> mentions(std::string_view line) {
  bool normal = false;
  bool anomaly = false;
  std::string word;
  auto flush = [&] {
    if (word == "normal") normal = true;
    if (word == "anomaly") anomaly = true;
    word.clear();
  };
  for (char c : line) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return {normal, anomaly};
}

}  // namespace

std::string_view to_string(VerdictLabel l) {
  switch (l) {
    case VerdictLabel::normal: return "normal";
    case VerdictLabel::anomaly: return "anomaly";
    case VerdictLabel::invalid: return "invalid";
  }
  return "?";
}

std::string_view to_string(ParseMode m) {
  switch (m) {
    case ParseMode::strict: return "strict";
    case ParseMode::lenient: return "lenient";
    case ParseMode::failed: return "failed";
  }
  return "?";
}

AgentVerdict parse_verdict(std::string_view raw) {
  AgentVerdict v;
  v.raw = std::string(raw);

  std::vector<std::string> lines;
  for (auto& l : text::split_lines(raw)) {
    if (!text::trim(l).empty()) lines.push_back(std::string(text::trim(l)));
  }

  if (lines.size() == 2) {
    if (auto label = bare_label(lines[0])) {
      v.label = *label;
      v.rationale = std::string(strip_prefix_ci(lines[1], "2)"));
      v.parse_mode = ParseMode::strict;
      return v;
    }
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto [normal, anomaly] = mentions(lines[i]);
    if (normal == anomaly) continue;
    v.label = anomaly ? VerdictLabel::anomaly : VerdictLabel::normal;
    std::string rest;
    for (std::size_t j = 0; j < lines.size(); ++j) {
      if (j == i) continue;
      if (!rest.empty()) rest += ' ';
      rest += lines[j];
    }
    v.rationale = rest.empty() ? lines[i] : rest;
    v.parse_mode = ParseMode::lenient;
    return v;
  }
  return v;
}

}  // namespace gridsigma::promptkit
