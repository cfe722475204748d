#include <cmath>
#include <cstdio>

#include "gridsigma/evalkit.hpp"

namespace gridsigma::evalkit {

std::string_view to_string(InvalidPolicy p) {
  return p == InvalidPolicy::as_wrong ? "as_wrong" : "excluded";
}

std::optional<InvalidPolicy> invalid_policy_from_string(std::string_view s) {
  if (s == "as_wrong" || s == "as-wrong") return InvalidPolicy::as_wrong;
  if (s == "excluded") return InvalidPolicy::excluded;
  return std::nullopt;
}

ConfusionResult confusion(std::span<const promptkit::VerdictLabel> preds,
                          std::span<const scenario::Label> truths, InvalidPolicy policy) {
  if (preds.size() != truths.size()) {
    throw DomainError("prediction count " + std::to_string(preds.size()) +
                      " differs from truth count " + std::to_string(truths.size()));
  }
  ConfusionResult r;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool truth_anomaly = truths[i] == scenario::Label::anomaly;
    bool pred_anomaly = false;
    if (preds[i] == promptkit::VerdictLabel::invalid) {
      ++r.invalid_count;
      if (policy == InvalidPolicy::excluded) continue;
      pred_anomaly = !truth_anomaly;
    } else {
      pred_anomaly = preds[i] == promptkit::VerdictLabel::anomaly;
    }
    if (pred_anomaly) {
      ++(truth_anomaly ? r.counts.tp : r.counts.fp);
    } else {
      ++(truth_anomaly ? r.counts.fn : r.counts.tn);
    }
  }
  return r;
}

namespace {
std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

MetricsReport metrics(const ConfusionCounts& c, std::size_t invalid_count, InvalidPolicy policy) {
  MetricsReport m;
  m.counts = c;
  m.invalid_count = invalid_count;
  m.invalid_policy = policy;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.precision = ratio(c.tp, c.tp + c.fp);
  if (m.recall && m.precision) m.f1 = f1_from(*m.recall, *m.precision);
  return m;
}

MetricsReport score(std::span<const promptkit::VerdictLabel> preds,
                    std::span<const scenario::Label> truths, InvalidPolicy policy) {
  const auto c = confusion(preds, truths, policy);
  return metrics(c.counts, c.invalid_count, policy);
}

std::optional<double> f1_from(double recall, double precision) {
  if (recall + precision == 0.0) return std::nullopt;
  return 2.0 * recall * precision / (recall + precision);
}

std::optional<double> lift(double old_value, double new_value) {
  if (old_value == 0.0) return std::nullopt;
  return (new_value - old_value) / old_value;
}

std::string format_metric(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
  return buf;
}

}  // namespace gridsigma::evalkit
