#include <algorithm>
#include <array>
#include <map>
#include <sstream>

#include "gridsigma/evalkit.hpp"
#include "json.hpp"

namespace gridsigma::evalkit {

namespace {

constexpr std::array<std::string_view, 4> kVariantRows = {
    "Value", "Mean, Std, Value", "Mean, Std, Value, Z_score", "Z_score"};
constexpr std::array<std::string_view, 5> kParadigmRows = {"Zero-shot", "Few-shot", "ICL",
                                                           "Fine-tuned", "Hybrid LLMs"};
constexpr std::array<std::string_view, 3> kHybridRows = {"Traditional DL", "LLM + DL",
                                                         "Performance lift"};
constexpr std::array<std::string_view, 5> kHeader = {"Configuration", "Accuracy", "Recall",
                                                     "Precision", "F1"};

struct Row {
  std::string label;
  std::array<std::optional<double>, 4> values;
};

std::array<std::optional<double>, 4> values_of(const MetricsReport& m) {
  return {m.accuracy, m.recall, m.precision, m.f1};
}

std::string_view title_of(TableKind kind) {
  switch (kind) {
    case TableKind::variants: return "Zero-shot Value Block variants";
    case TableKind::paradigms: return "Prompting paradigms";
    case TableKind::hybrid: return "Detector vs hybrid";
  }
  return "";
}

}  // namespace

std::optional<TableKind> table_kind_from_string(std::string_view s) {
  if (s == "variants") return TableKind::variants;
  if (s == "paradigms") return TableKind::paradigms;
  if (s == "hybrid") return TableKind::hybrid;
  return std::nullopt;
}

std::optional<TableFormat> table_format_from_string(std::string_view s) {
  if (s == "text") return TableFormat::text;
  if (s == "md" || s == "markdown") return TableFormat::markdown;
  if (s == "json") return TableFormat::json;
  return std::nullopt;
}

std::span<const std::string_view> table_rows(TableKind kind) {
  switch (kind) {
    case TableKind::variants: return kVariantRows;
    case TableKind::paradigms: return kParadigmRows;
    case TableKind::hybrid: return kHybridRows;
  }
  return {};
}

std::string_view variant_row_label(promptkit::Variant v) {
  return kVariantRows[static_cast<std::size_t>(v)];
}

std::string_view paradigm_row_label(promptkit::Paradigm p) {
  return kParadigmRows[static_cast<std::size_t>(p)];
}

std::string ablation_table(TableKind kind, std::span<const LabeledReport> reports,
                           TableFormat format) {
  const auto order = table_rows(kind);
  std::map<std::size_t, const LabeledReport*> placed;
  for (const auto& r : reports) {
    const auto it = std::find(order.begin(), order.end(), r.configuration);
    if (it == order.end() || (kind == TableKind::hybrid && *it == "Performance lift")) {
      throw DomainError("unknown configuration row \"" + r.configuration + "\"");
    }
    const auto pos = static_cast<std::size_t>(it - order.begin());
    if (!placed.emplace(pos, &r).second) {
      throw DomainError("duplicate configuration row \"" + r.configuration + "\"");
    }
  }

  std::vector<Row> rows;
  for (const auto& [pos, r] : placed) rows.push_back({r->configuration, values_of(r->report)});
  if (kind == TableKind::hybrid && placed.size() == 2) {
    const auto old_v = values_of(placed.at(0)->report);
    const auto new_v = values_of(placed.at(1)->report);
    Row lift_row{"Performance lift", {}};
    for (std::size_t i = 0; i < 4; ++i) {
      if (old_v[i] && new_v[i]) lift_row.values[i] = lift(*old_v[i], *new_v[i]);
    }
    rows.push_back(lift_row);
  }

  std::ostringstream os;
  if (format == TableFormat::json) {
    nlohmann::json j;
    j["table"] = std::string(title_of(kind));
    j["columns"] = std::vector<std::string>(kHeader.begin(), kHeader.end());
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json jr{{"configuration", row.label}};
      const char* keys[] = {"accuracy", "recall", "precision", "f1"};
      for (std::size_t i = 0; i < 4; ++i) {
        jr[keys[i]] = row.values[i] ? nlohmann::json(*row.values[i]) : nlohmann::json(nullptr);
      }
      j["rows"].push_back(jr);
    }
    return j.dump(1) + "\n";
  }

  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({});
  for (std::size_t c = 0; c < 5; ++c) cells.back()[c] = kHeader[c];
  for (const auto& row : rows) {
    cells.push_back({row.label, format_metric(row.values[0]), format_metric(row.values[1]),
                     format_metric(row.values[2]), format_metric(row.values[3])});
  }

  if (format == TableFormat::markdown) {
    os << "**" << title_of(kind) << "**\n\n";
    for (std::size_t r = 0; r < cells.size(); ++r) {
      os << '|';
      for (const auto& c : cells[r]) os << ' ' << c << " |";
      os << '\n';
      if (r == 0) os << "|---|---:|---:|---:|---:|\n";
    }
    return os.str();
  }

  std::array<std::size_t, 5> width{};
  for (const auto& r : cells) {
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], r[c].size());
  }
  os << title_of(kind) << '\n';
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      const auto& s = cells[r][c];
      const std::string pad(width[c] - s.size(), ' ');
      if (c == 0) {
        os << s << pad;
      } else {
        os << "  " << pad << s;
      }
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = width[0];
      for (std::size_t c = 1; c < 5; ++c) total += 2 + width[c];
      os << std::string(total, '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace gridsigma::evalkit
