#include "gridsigma/grid.hpp"

namespace gridsigma::grid {

std::optional<std::size_t> FeatureLayout::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> FeatureLayout::names() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.name);
  return out;
}

std::string_view sensor_kind_tag(SensorKind kind) {
  switch (kind) {
    case SensorKind::p_inj: return "P";
    case SensorKind::q_inj: return "Q";
    case SensorKind::p_flow: return "Pf";
    case SensorKind::q_flow: return "Qf";
    case SensorKind::v_mag: return "V";
  }
  return "?";
}

FeatureLayout default_layout(const GridCase& c, bool include_voltage) {
  FeatureLayout layout;
  auto add_bus_rows = [&](SensorKind kind) {
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
      layout.entries.push_back(
          {std::string(sensor_kind_tag(kind)) + "_" + std::to_string(c.buses[i].id), kind, i});
    }
  };
  auto add_branch_rows = [&](SensorKind kind) {
    for (std::size_t k = 0; k < c.branches.size(); ++k) {
      layout.entries.push_back(
          {std::string(sensor_kind_tag(kind)) + "_" + std::to_string(k + 1), kind, k});
    }
  };
  add_bus_rows(SensorKind::p_inj);
  add_bus_rows(SensorKind::q_inj);
  add_branch_rows(SensorKind::p_flow);
  add_branch_rows(SensorKind::q_flow);
  if (include_voltage) add_bus_rows(SensorKind::v_mag);
  return layout;
}

std::vector<double> extract_features(const PowerFlowSolution& sol, const FeatureLayout& layout) {
  std::vector<double> out;
  out.reserve(layout.size());
  for (const auto& e : layout.entries) {
    const std::vector<double>* source = nullptr;
    switch (e.kind) {
      case SensorKind::p_inj: source = &sol.p_inj; break;
      case SensorKind::q_inj: source = &sol.q_inj; break;
      case SensorKind::p_flow: source = &sol.p_flow_from; break;
      case SensorKind::q_flow: source = &sol.q_flow_from; break;
      case SensorKind::v_mag: source = &sol.v_mag; break;
    }
    if (e.index >= source->size()) {
      throw DomainError("layout entry " + e.name + " index " + std::to_string(e.index) +
                        " out of range");
    }
    out.push_back((*source)[e.index]);
  }
  return out;
}

}  // namespace gridsigma::grid
