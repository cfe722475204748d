#include <sstream>

#include "gridsigma/digest.hpp"
#include "gridsigma/evalkit.hpp"
#include "json.hpp"

namespace gridsigma::evalkit {

using nlohmann::json;
using promptkit::Paradigm;
using promptkit::VerdictLabel;

namespace {

VerdictLabel as_verdict(scenario::Label l) {
  return l == scenario::Label::anomaly ? VerdictLabel::anomaly : VerdictLabel::normal;
}

json metrics_json(const MetricsReport& m) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"accuracy", opt(m.accuracy)},
              {"recall", opt(m.recall)},
              {"precision", opt(m.precision)},
              {"f1", opt(m.f1)},
              {"tp", m.counts.tp},
              {"fp", m.counts.fp},
              {"fn", m.counts.fn},
              {"tn", m.counts.tn},
              {"invalid_count", m.invalid_count},
              {"invalid_policy", std::string(to_string(m.invalid_policy))}};
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport m;
  auto opt = [&](const char* k) -> std::optional<double> {
    return j.at(k).is_null() ? std::nullopt : std::optional<double>(j.at(k).get<double>());
  };
  m.accuracy = opt("accuracy");
  m.recall = opt("recall");
  m.precision = opt("precision");
  m.f1 = opt("f1");
  m.counts = {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
              j.at("fn").get<std::size_t>(), j.at("tn").get<std::size_t>()};
  m.invalid_count = j.at("invalid_count").get<std::size_t>();
  const auto policy = invalid_policy_from_string(j.at("invalid_policy").get<std::string>());
  if (!policy) throw DomainError("manifest: unknown invalid_policy");
  m.invalid_policy = *policy;
  return m;
}

void finish(RunOutcome& out, const json& config, const scenario::Dataset& dataset,
            InvalidPolicy policy) {
  std::vector<VerdictLabel> preds;
  std::vector<scenario::Label> truths;
  for (const auto& s : out.samples) {
    preds.push_back(s.label);
    truths.push_back(s.truth);
  }
  out.as_wrong = score(preds, truths, InvalidPolicy::as_wrong);
  out.excluded = score(preds, truths, InvalidPolicy::excluded);
  out.report = policy == InvalidPolicy::as_wrong ? out.as_wrong : out.excluded;
  if (!out.samples.empty() && out.as_wrong.invalid_count == out.samples.size()) {
    out.log.push_back("every verdict in the batch is invalid");
  }

  json j;
  j["method"] = out.method;
  j["config"] = config;
  j["dataset_digest"] = dataset_digest(dataset);
  j["test_size"] = out.samples.size();
  j["invalid_policy"] = std::string(to_string(policy));
  j["samples"] = json::array();
  for (const auto& s : out.samples) {
    j["samples"].push_back(json{{"id", s.id},
                                {"prompt_hash", s.prompt_hash},
                                {"label", std::string(promptkit::to_string(s.label))},
                                {"truth", std::string(scenario::to_string(s.truth))},
                                {"parse_mode", s.parse_mode}});
  }
  j["metrics"] = json{{"as_wrong", metrics_json(out.as_wrong)},
                      {"excluded", metrics_json(out.excluded)}};
  out.manifest = j.dump(1) + "\n";
}

}  // namespace

promptkit::PromptConfig RunConfig::prompt_config() const {
  auto config = promptkit::PromptConfig::make(paradigm, variant, example_seed);
  if (k_examples != 0) config.k_examples = k_examples;
  config.select_m = select_m;
  return config;
}

void RunConfig::validate() const {
  prompt_config().validate();
  if (std::holds_alternative<agents::HttpEndpoint>(agent)) {
    if (!endpoint) throw DomainError("http agent needs an endpoint configuration");
    endpoint->validate();
  }
}

std::string dataset_digest(const scenario::Dataset& dataset) {
  std::ostringstream os;
  for (auto split : {scenario::Split::train, scenario::Split::validation, scenario::Split::test}) {
    for (int id : dataset.ids(split)) os << scenario::sample_to_jsonl(dataset.sample(id), split);
  }
  os << scenario::stats_to_json(dataset.stats);
  return sha256_hex(os.str());
}

RunOutcome run_experiment(const RunConfig& run, const scenario::Dataset& dataset,
                          const detectors::DetectorModel* model) {
  run.validate();
  const auto config = run.prompt_config();
  const auto train = dataset.split_samples(scenario::Split::train);
  const auto test = dataset.split_samples(scenario::Split::test);
  const bool hybrid = run.paradigm == Paradigm::hybrid_select;

  json cfg{{"paradigm", std::string(promptkit::to_string(run.paradigm))},
           {"variant", std::string(promptkit::to_string(run.variant))},
           {"agent", agents::describe(run.agent)},
           {"k", config.k_examples},
           {"example_seed", run.example_seed},
           {"decimals", config.decimals}};
  if (run.endpoint && std::holds_alternative<agents::HttpEndpoint>(run.agent)) {
    cfg["model"] = run.endpoint->model_name;
    cfg["temperature"] = run.endpoint->temperature;
    cfg["max_tokens"] = run.endpoint->max_tokens;
  }

  std::optional<agents::CompletionCache> cache;
  if (run.cache_dir) cache.emplace(*run.cache_dir);
  const agents::EndpointConfig* endpoint = run.endpoint ? &*run.endpoint : nullptr;

  RunOutcome out;
  if (hybrid) {
    if (!model) throw DomainError("hybrid runs need a trained detector model");
    out.method = "hybrid";
    double tau = 0.0;
    if (model->hybrid_threshold && model->hybrid_m == run.select_m) {
      tau = *model->hybrid_threshold;
    } else {
      tau = detectors::calibrate_hybrid(*model, dataset.split_samples(scenario::Split::validation),
                                        dataset.stats, run.select_m);
    }
    cfg["m"] = run.select_m;
    cfg["hybrid_threshold"] = tau;
    cfg["train_seed"] = model->train_seed;

    std::vector<promptkit::PromptBundle> prompts;
    for (const auto& s : test) {
      prompts.push_back(detectors::selection_prompt(s, dataset.stats, dataset.layout, run.select_m));
    }
    auto batch = agents::run_batch(prompts, run.agent, endpoint, cache ? &*cache : nullptr,
                                   run.mock_parallelism);
    out.network_calls = batch.network_calls;
    out.cache_hits = batch.cache_hits;
    out.log = std::move(batch.log);
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto sel = detectors::selection_from_reply(test[i].id, batch.completions[i],
                                                       dataset.layout, run.select_m, &out.log);
      const auto label = detectors::hybrid_detect(*model, sel, tau, test[i].features);
      out.samples.push_back({test[i].id, prompts[i].content_hash, as_verdict(label), test[i].label,
                             "selection:" + std::string(detectors::to_string(sel.source))});
    }
  } else {
    out.method = "llm";
    const auto examples = promptkit::select_examples(train, dataset.stats, config);
    std::vector<int> example_ids;
    for (const auto& e : examples) example_ids.push_back(e.id);
    cfg["example_ids"] = example_ids;

    std::vector<promptkit::PromptBundle> prompts;
    for (const auto& s : test) {
      prompts.push_back(promptkit::render_prompt(s, dataset.stats, dataset.layout, config, examples));
    }
    auto batch = agents::run_batch(prompts, run.agent, endpoint, cache ? &*cache : nullptr,
                                   run.mock_parallelism);
    out.network_calls = batch.network_calls;
    out.cache_hits = batch.cache_hits;
    out.log = std::move(batch.log);
    for (std::size_t i = 0; i < test.size(); ++i) {
      out.samples.push_back({test[i].id, prompts[i].content_hash, batch.verdicts[i].label,
                             test[i].label,
                             std::string(promptkit::to_string(batch.verdicts[i].parse_mode))});
    }
  }
  finish(out, cfg, dataset, run.invalid_policy);
  return out;
}

RunOutcome run_experiment(const RunConfig& run) {
  if (run.data_dir.empty()) throw DomainError("run needs a dataset directory");
  return run_experiment(run, scenario::load_dataset(run.data_dir));
}

RunOutcome evaluate_detector(const scenario::Dataset& dataset, const detectors::DetectorModel& model) {
  RunOutcome out;
  out.method = "dl";
  for (const auto& s : dataset.split_samples(scenario::Split::test)) {
    out.samples.push_back({s.id, "", as_verdict(detectors::detect(model, s.features)), s.label, "score"});
  }
  json cfg{{"layer_dims", model.layer_dims},
           {"threshold", *model.threshold},
           {"train_seed", model.train_seed}};
  finish(out, cfg, dataset, InvalidPolicy::as_wrong);
  return out;
}

LabeledReport report_from_manifest(std::string_view manifest_json, TableKind kind) {
  try {
    const auto j = json::parse(manifest_json);
    const auto method = j.at("method").get<std::string>();
    const auto& cfg = j.at("config");
    const auto policy = j.at("invalid_policy").get<std::string>();
    LabeledReport r;
    r.report = metrics_from_json(j.at("metrics").at(policy));
    switch (kind) {
      case TableKind::variants: {
        if (method != "llm" || cfg.at("paradigm").get<std::string>() != "zero-shot") {
          throw DomainError("manifest is not a zero-shot LLM run");
        }
        const auto v = promptkit::variant_from_string(cfg.at("variant").get<std::string>());
        if (!v) throw DomainError("manifest: unknown variant");
        r.configuration = variant_row_label(*v);
        break;
      }
      case TableKind::paradigms: {
        if (method == "dl") throw DomainError("manifest is a detector-only run");
        const auto p = promptkit::paradigm_from_string(cfg.at("paradigm").get<std::string>());
        if (!p) throw DomainError("manifest: unknown paradigm");
        r.configuration = paradigm_row_label(*p);
        break;
      }
      case TableKind::hybrid:
        if (method == "dl") {
          r.configuration = "Traditional DL";
        } else if (method == "hybrid") {
          r.configuration = "LLM + DL";
        } else {
          throw DomainError("manifest is neither a detector nor a hybrid run");
        }
        break;
    }
    return r;
  } catch (const json::exception& e) {
    throw DomainError(std::string("manifest: ") + e.what());
  }
}

}  // namespace gridsigma::evalkit
