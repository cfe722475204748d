#include <cmath>
#include <set>
#include <sstream>

#include "gridsigma/promptkit.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::promptkit {
namespace {

std::string_view group_title(grid::SensorKind kind) {
  switch (kind) {
    case grid::SensorKind::p_inj: return "[P] active power injection (pu)";
    case grid::SensorKind::q_inj: return "[Q] reactive power injection (pu)";
    case grid::SensorKind::p_flow: return "[Pf] line active power flow, sending end (pu)";
    case grid::SensorKind::q_flow: return "[Qf] line reactive power flow, sending end (pu)";
    case grid::SensorKind::v_mag: return "[V] bus voltage magnitude (pu)";
  }
  return "[?]";
}

std::vector<std::string_view> columns_of(Variant v) {
  switch (v) {
    case Variant::value: return {"value"};
    case Variant::mean_std_value: return {"value", "mean", "std"};
    case Variant::mean_std_value_z: return {"value", "mean", "std", "abs_z"};
    case Variant::z_only: return {"abs_z"};
  }
  return {};
}

}  // namespace

std::string_view to_string(Paradigm p) {
  switch (p) {
    case Paradigm::zero_shot: return "zero-shot";
    case Paradigm::few_shot: return "few-shot";
    case Paradigm::icl: return "icl";
    case Paradigm::finetune_export: return "fine-tuned";
    case Paradigm::hybrid_select: return "hybrid";
  }
  return "?";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::value: return "value";
    case Variant::mean_std_value: return "mean_std_value";
    case Variant::mean_std_value_z: return "mean_std_value_z";
    case Variant::z_only: return "z_only";
  }
  return "?";
}

std::optional<Paradigm> paradigm_from_string(std::string_view s) {
  for (auto p : {Paradigm::zero_shot, Paradigm::few_shot, Paradigm::icl,
                 Paradigm::finetune_export, Paradigm::hybrid_select}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::optional<Variant> variant_from_string(std::string_view s) {
  for (auto v : {Variant::value, Variant::mean_std_value, Variant::mean_std_value_z,
                 Variant::z_only}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::string render_value_block(std::span<const double> features,
                               const scenario::FeatureStats& stats,
                               const grid::FeatureLayout& layout, Variant variant, int decimals) {
  if (features.size() != layout.size() || stats.mean.size() != layout.size()) {
    throw DomainError("value block: feature/stats/layout lengths disagree (" +
                      std::to_string(features.size()) + "/" + std::to_string(stats.mean.size()) +
                      "/" + std::to_string(layout.size()) + ")");
  }
  const auto z = scenario::zscores(features, stats);
  const auto cols = columns_of(variant);

  std::ostringstream os;
  os << "sensor";
  for (auto c : cols) os << " | " << c;
  os << '\n';
  std::optional<grid::SensorKind> group;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& e = layout.entries[i];
    if (group != e.kind) {
      group = e.kind;
      os << group_title(e.kind) << '\n';
    }
    os << e.name;
    for (auto c : cols) {
      os << " | ";
      if (c == "value") os << text::fixed(features[i], decimals);
      else if (c == "mean") os << text::fixed(stats.mean[i], decimals);
      else if (c == "std") os << text::fixed(stats.std[i], decimals);
      else os << text::truncated(std::fabs(z[i]), decimals);
    }
    os << '\n';
  }
  return os.str();
}

ValueTable parse_value_block(std::string_view block) {
  ValueTable table;
  std::set<std::string> seen;
  bool have_header = false;
  std::size_t line_no = 0;
  for (const auto& raw_line : text::split_lines(block)) {
    ++line_no;
    const auto line = text::trim(raw_line);
    if (line.empty() || line.front() == '[') continue;
    auto cells = text::split(line, '|');
    for (auto& c : cells) c = text::trim(c);
    if (!have_header) {
      if (cells.size() < 2 || cells[0] != "sensor") {
        throw ParseError("value block header must start with 'sensor |'", line_no);
      }
      for (std::size_t k = 1; k < cells.size(); ++k) {
        const std::string name(cells[k]);
        if (name != "value" && name != "mean" && name != "std" && name != "abs_z") {
          throw ParseError("unknown column '" + name + "'", line_no);
        }
        for (const auto& existing : table.columns) {
          if (existing == name) throw ParseError("duplicate column '" + name + "'", line_no);
        }
        table.columns.push_back(name);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != table.columns.size() + 1) {
      throw ParseError("row has " + std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(table.columns.size() + 1),
                       line_no);
    }
    ValueRow row;
    row.sensor = std::string(cells[0]);
    if (row.sensor.empty()) throw ParseError("empty sensor name", line_no);
    if (!seen.insert(row.sensor).second) {
      throw ParseError("duplicate sensor '" + row.sensor + "'", line_no);
    }
    for (std::size_t k = 0; k < table.columns.size(); ++k) {
      double v = 0.0;
      if (!text::parse_double(cells[k + 1], v)) {
        throw ParseError("non-numeric cell '" + std::string(cells[k + 1]) + "'", line_no);
      }
      const auto& col = table.columns[k];
      if (col == "value") row.value = v;
      else if (col == "mean") row.mean = v;
      else if (col == "std") row.std = v;
      else row.abs_z = v;
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("value block has no header", 0);
  if (table.rows.empty()) throw ParseError("value block has no rows", 0);
  return table;
}

}  // namespace gridsigma::promptkit
