#include <cmath>

#include "gridsigma/ruleoracle.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::ruleoracle {

RuleVerdict three_sigma_label(std::span<const double> z, double threshold) {
  if (z.empty()) throw DomainError("three-sigma rule needs a non-empty z vector");
  if (!(threshold > 0.0)) throw DomainError("threshold must be positive");
  RuleVerdict v;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double a = std::fabs(z[i]);
    if (a > v.max_abs_z || i == 0) {
      v.max_abs_z = a;
      v.argmax = i;
    }
    if (a >= threshold) v.violating.push_back(i);
  }
  v.label = v.violating.empty() ? scenario::Label::normal : scenario::Label::anomaly;
  return v;
}

std::string rule_rationale(const RuleVerdict& v, std::span<const double> z,
                           std::span<const std::string> names, int decimals) {
  auto name = [&](std::size_t i) {
    return i < names.size() ? names[i] : "#" + std::to_string(i);
  };
  if (v.label == scenario::Label::anomaly) {
    const std::size_t i = v.violating.front();
    return "sensor " + name(i) + " |z|=" + text::truncated(std::fabs(z[i]), decimals) +
           " exceeds 3.0";
  }
  return "All measurements have |z| < 3.0 (largest |z|=" + text::truncated(v.max_abs_z, decimals) +
         " at sensor " + name(v.argmax) + ").";
}

}  // namespace gridsigma::ruleoracle
