#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gridsigma/ruleoracle.hpp"

namespace gridsigma::ruleoracle {
namespace {

struct PooledStats {
  double mean = 0.0;
  double std = 0.0;
};

PooledStats pool(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

std::string group_of(const std::string& sensor) { return sensor.substr(0, sensor.find('_')); }

// |z| per target row following the prompt's decision procedure.
std::vector<double> target_abs_z(const promptkit::ParsedPrompt& p) {
  const auto& rows = p.target.rows;
  std::vector<double> out(rows.size());

  // Mean/std inference when the table carries raw values only: per sensor
  // across every block in the prompt if examples exist, otherwise across
  // the sensor's kind group within the target block.
  std::map<std::string, PooledStats> inferred;
  const bool needs_inference = std::any_of(rows.begin(), rows.end(), [](const auto& r) {
    return !r.abs_z && !(r.value && r.mean && r.std);
  });
  if (needs_inference) {
    std::map<std::string, std::vector<double>> series;
    if (!p.examples.empty()) {
      for (const auto& [table, label] : p.examples) {
        for (const auto& r : table.rows) {
          if (r.value) series[r.sensor].push_back(*r.value);
        }
      }
      for (const auto& r : rows) {
        if (r.value) series[r.sensor].push_back(*r.value);
      }
      for (const auto& [sensor, xs] : series) inferred[sensor] = pool(xs);
    } else {
      for (const auto& r : rows) {
        if (r.value) series[group_of(r.sensor)].push_back(*r.value);
      }
      for (const auto& r : rows) {
        const auto it = series.find(group_of(r.sensor));
        if (it != series.end()) inferred[r.sensor] = pool(it->second);
      }
    }
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.abs_z) {
      out[i] = std::fabs(*r.abs_z);
      continue;
    }
    if (!r.value) throw ParseError("row " + r.sensor + " has neither a value nor a z-score", 0);
    double mean = 0.0;
    double sd = 0.0;
    if (r.mean && r.std) {
      mean = *r.mean;
      sd = *r.std;
    } else {
      const auto it = inferred.find(r.sensor);
      if (it == inferred.end()) throw ParseError("cannot infer statistics for " + r.sensor, 0);
      mean = r.mean.value_or(it->second.mean);
      sd = r.std.value_or(it->second.std);
    }
    out[i] = std::fabs((*r.value - mean) / std::max(sd, scenario::kStdFloor));
  }
  return out;
}

}  // namespace

std::string reference_completion(std::string_view prompt_text) {
  const auto parsed = promptkit::parse_prompt(prompt_text);
  const auto abs_z = target_abs_z(parsed);
  std::vector<std::string> names;
  for (const auto& r : parsed.target.rows) names.push_back(r.sensor);

  if (parsed.selection_task) {
    std::vector<std::size_t> order(abs_z.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return abs_z[a] > abs_z[b]; });
    order.resize(std::min(order.size(), parsed.select_m));
    std::string out;
    for (auto i : order) out += names[i] + "\n";
    return out;
  }

  const auto verdict = three_sigma_label(abs_z);
  return std::string(scenario::to_string(verdict.label)) + "\n" +
         rule_rationale(verdict, abs_z, names);
}

promptkit::AgentVerdict reference_agent(const promptkit::PromptBundle& prompt) {
  try {
    return promptkit::parse_verdict(reference_completion(prompt.text));
  } catch (const DomainError& e) {
    promptkit::AgentVerdict v;
    v.label = promptkit::VerdictLabel::invalid;
    v.parse_mode = promptkit::ParseMode::failed;
    v.rationale = std::string("unparseable value block: ") + e.what();
    return v;
  }
}

}  // namespace gridsigma::ruleoracle
