#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gridsigma/promptkit.hpp"
#include "gridsigma/scenario.hpp"

namespace gridsigma::agents {

struct EndpointConfig {
  std::string base_url;
  std::string model_name;
  std::string api_key;
  double temperature = 0.0;
  int max_tokens = 256;
  std::chrono::milliseconds timeout{60000};
  std::size_t max_in_flight = 4;
  int retries = 2;

  void validate() const;
  /// GRIDSIGMA_BASE_URL, GRIDSIGMA_API_KEY, GRIDSIGMA_MODEL.
  static EndpointConfig from_env();
};

struct HttpEndpoint {};
struct ReferenceRule {};
struct AlwaysNormal {};
struct CoinFlip {
  std::uint64_t seed = 0;
};

using AgentKind = std::variant<HttpEndpoint, ReferenceRule, AlwaysNormal, CoinFlip>;

/// "http", "reference", "always-normal", "coin-flip(<seed>)".
std::string describe(const AgentKind& agent);

inline constexpr std::string_view kAlwaysNormalAnswer = "normal\nNo measurement exceeds the rule.";

/// Content-addressed completion store: in memory, mirrored to
/// <dir>/<first-2-hex>/<digest>.txt when a directory is given.
class CompletionCache {
 public:
  CompletionCache() = default;
  explicit CompletionCache(std::filesystem::path dir);

  /// digest(prompt text | model | temperature)
  static std::string key(std::string_view prompt_text, std::string_view model, double temperature);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& completion);
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::string, std::string> memory_;
};

struct CompletionResult {
  std::optional<std::string> text;  // absent on failure
  std::string error;
  bool cache_hit = false;
  bool network_call = false;
};

/// One completion. Mocks compute locally; http_endpoint sends one
/// chat-completions request. Failures come back in `error`, never thrown.
CompletionResult complete(const promptkit::PromptBundle& prompt, const AgentKind& agent,
                          const EndpointConfig* endpoint, CompletionCache* cache);

struct BatchResult {
  std::vector<std::optional<std::string>> completions;
  std::vector<promptkit::AgentVerdict> verdicts;
  std::size_t network_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t errors = 0;
  std::vector<std::string> log;
};

/// Runs every prompt with at most max_in_flight outstanding requests
/// (endpoint->max_in_flight for http, `mock_parallelism` for mocks). Results
/// keep prompt order; a failed prompt becomes an invalid verdict.
BatchResult run_batch(std::span<const promptkit::PromptBundle> prompts, const AgentKind& agent,
                      const EndpointConfig* endpoint, CompletionCache* cache,
                      std::size_t mock_parallelism = 4);

// ---------------------------------------------------------------------------
// Fine-tuning export

/// Two-line answer: ground-truth label, rationale from the three-sigma
/// verdict on the sample's exact z-scores.
std::string gold_answer(const scenario::Sample& sample, const scenario::FeatureStats& stats,
                        const grid::FeatureLayout& layout);

/// One chat record per sample: the rendered zero-shot prompt as the user
/// message and gold_answer as the assistant message.
std::string export_finetune_dataset(std::span<const scenario::Sample> train,
                                    const scenario::FeatureStats& stats,
                                    const grid::FeatureLayout& layout,
                                    const promptkit::PromptConfig& config);

}  // namespace gridsigma::agents
