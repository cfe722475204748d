#include <cstdlib>
#include <mutex>
#include <thread>

#include "gridsigma/agents.hpp"
#include "gridsigma/digest.hpp"
#include "gridsigma/rng.hpp"
#include "gridsigma/ruleoracle.hpp"
#include "gridsigma/text.hpp"
#include "http_client.hpp"

namespace gridsigma::agents {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

std::string coin_flip_answer(std::string_view prompt_text, std::uint64_t seed) {
  const std::uint64_t h = std::stoull(sha256_hex(prompt_text).substr(0, 16), nullptr, 16);
  const bool anomaly = (mix64(h ^ mix64(seed)) & 1ULL) != 0;
  return anomaly ? "anomaly\nCoin flip." : "normal\nCoin flip.";
}

}  // namespace

void EndpointConfig::validate() const {
  if (base_url.empty()) throw DomainError("endpoint base_url is empty (set GRIDSIGMA_BASE_URL)");
  if (model_name.empty()) throw DomainError("endpoint model is empty (set GRIDSIGMA_MODEL)");
  if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
  if (max_in_flight < 1) throw DomainError("max_in_flight must be >= 1");
  if (retries < 0) throw DomainError("retries must be >= 0");
}

EndpointConfig EndpointConfig::from_env() {
  EndpointConfig c;
  c.base_url = env_or_empty("GRIDSIGMA_BASE_URL");
  c.api_key = env_or_empty("GRIDSIGMA_API_KEY");
  c.model_name = env_or_empty("GRIDSIGMA_MODEL");
  return c;
}

std::string describe(const AgentKind& agent) {
  return std::visit(overloaded{
                        [](const HttpEndpoint&) -> std::string { return "http"; },
                        [](const ReferenceRule&) -> std::string { return "reference"; },
                        [](const AlwaysNormal&) -> std::string { return "always-normal"; },
                        [](const CoinFlip& c) -> std::string {
                          return "coin-flip(" + std::to_string(c.seed) + ")";
                        },
                    },
                    agent);
}

CompletionResult complete(const promptkit::PromptBundle& prompt, const AgentKind& agent,
                          const EndpointConfig* endpoint, CompletionCache* cache) {
  CompletionResult result;
  const bool http = std::holds_alternative<HttpEndpoint>(agent);
  if (http && endpoint == nullptr) {
    result.error = "http agent requires an endpoint configuration";
    return result;
  }
  const std::string model = http ? endpoint->model_name : "mock:" + describe(agent);
  const double temperature = http ? endpoint->temperature : 0.0;
  const std::string key = CompletionCache::key(prompt.text, model, temperature);

  if (cache) {
    if (auto hit = cache->get(key)) {
      result.text = std::move(hit);
      result.cache_hit = true;
      return result;
    }
  }

  try {
    result.text = std::visit(overloaded{
                                 [&](const HttpEndpoint&) {
                                   result.network_call = true;
                                   return detail::chat_completion(*endpoint, prompt.text);
                                 },
                                 [&](const ReferenceRule&) {
                                   return ruleoracle::reference_completion(prompt.text);
                                 },
                                 [](const AlwaysNormal&) { return std::string(kAlwaysNormalAnswer); },
                                 [&](const CoinFlip& c) { return coin_flip_answer(prompt.text, c.seed); },
                             },
                             agent);
  } catch (const std::exception& e) {
    result.error = e.what();
    return result;
  }
  if (cache) cache->put(key, *result.text);
  return result;
}

BatchResult run_batch(std::span<const promptkit::PromptBundle> prompts, const AgentKind& agent,
                      const EndpointConfig* endpoint, CompletionCache* cache,
                      std::size_t mock_parallelism) {
  if (prompts.empty()) throw DomainError("run_batch needs at least one prompt");
  const bool http = std::holds_alternative<HttpEndpoint>(agent);
  if (http) {
    if (endpoint == nullptr) throw DomainError("http agent requires an endpoint configuration");
    endpoint->validate();
  }
  const std::size_t in_flight =
      std::max<std::size_t>(1, std::min(prompts.size(), http ? endpoint->max_in_flight : mock_parallelism));

  std::vector<CompletionResult> results(prompts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      results[i] = complete(prompts[i], agent, endpoint, cache);
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < in_flight; ++t) pool.emplace_back(worker);
    worker();
  }

  BatchResult out;
  out.completions.reserve(prompts.size());
  out.verdicts.reserve(prompts.size());
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    auto& r = results[i];
    out.network_calls += r.network_call ? 1 : 0;
    out.cache_hits += r.cache_hit ? 1 : 0;
    if (r.text) {
      out.verdicts.push_back(promptkit::parse_verdict(*r.text));
    } else {
      ++out.errors;
      out.log.push_back("prompt " + std::to_string(i) + " (sample " +
                        std::to_string(prompts[i].sample_id) + "): " + r.error);
      promptkit::AgentVerdict v;
      v.rationale = r.error;
      out.verdicts.push_back(std::move(v));
    }
    out.completions.push_back(std::move(r.text));
  }
  return out;
}

}  // namespace gridsigma::agents
