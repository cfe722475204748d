#include <atomic>
#include <mutex>
#include <thread>

#include "doctest.h"
#include "gridsigma/agents.hpp"
#include "gridsigma/digest.hpp"
#include "gridsigma/ruleoracle.hpp"
#include "gridsigma/text.hpp"
#include "json.hpp"
#include "support.hpp"
// After Eigen: resolv.h defines a _res macro that collides with Eigen parameters.
#include "httplib.h"

using namespace gridsigma;
using namespace gridsigma::agents;
using promptkit::PromptBundle;

namespace {

// Local chat-completions stand-in. Replies "normal\necho <content>", sleeps
// a little per request, and misbehaves on marked prompts.
class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++active_;
      int seen = max_active_.load();
      while (now > seen && !max_active_.compare_exchange_weak(seen, now)) {
      }
      ++requests_;
      const auto body = nlohmann::json::parse(req.body);
      const auto content = body.at("messages").at(0).at("content").get<std::string>();
      {
        std::lock_guard lock(mutex_);
        last_model_ = body.at("model").get<std::string>();
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(15));
      if (content.find("SLOW") != std::string::npos) std::this_thread::sleep_for(std::chrono::milliseconds(1200));
      if (content.find("FLAKY") != std::string::npos && flaky_failures_++ == 0) {
        res.status = 503;
        --active_;
        return;
      }
      if (content.find("TEAPOT") != std::string::npos) {
        res.status = 418;
        --active_;
        return;
      }
      const nlohmann::json reply = {
          {"choices", nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", "normal\necho " + content}}}}})}};
      res.set_content(reply.dump(), "application/json");
      --active_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  EndpointConfig config(std::size_t max_in_flight) const {
    EndpointConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_);
    c.model_name = "fake-model";
    c.max_in_flight = max_in_flight;
    c.timeout = std::chrono::milliseconds(3000);
    return c;
  }

  int requests() const { return requests_.load(); }
  int max_active() const { return max_active_.load(); }
  std::string last_model() const {
    std::lock_guard lock(mutex_);
    return last_model_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> active_{0};
  std::atomic<int> max_active_{0};
  std::atomic<int> requests_{0};
  std::atomic<int> flaky_failures_{0};
  mutable std::mutex mutex_;
  std::string last_model_;
};

std::vector<PromptBundle> numbered_prompts(std::size_t n, const std::string& tag = "") {
  std::vector<PromptBundle> out;
  for (std::size_t i = 0; i < n; ++i) {
    PromptBundle b;
    b.text = "prompt " + std::to_string(i) + tag;
    b.sample_id = static_cast<int>(i);
    b.content_hash = sha256_hex(b.text);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace

TEST_SUITE("agents") {

TEST_CASE("mock agents") {
  const auto& ds = testsupport::default_dataset();
  const auto cfg = promptkit::PromptConfig::make(promptkit::Paradigm::zero_shot, promptkit::Variant::z_only);
  const auto p = promptkit::render_prompt(ds.samples[3], ds.stats, ds.layout, cfg, {});

  auto r = complete(p, AlwaysNormal{}, nullptr, nullptr);
  REQUIRE(r.text);
  CHECK(*r.text == "normal\nNo measurement exceeds the rule.");

  const auto a = complete(p, CoinFlip{7}, nullptr, nullptr);
  const auto b = complete(p, CoinFlip{7}, nullptr, nullptr);
  CHECK(*a.text == *b.text);
  int anomalies = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    anomalies += complete(p, CoinFlip{seed}, nullptr, nullptr).text->starts_with("anomaly") ? 1 : 0;
  }
  CHECK(anomalies > 60);
  CHECK(anomalies < 140);

  r = complete(p, ReferenceRule{}, nullptr, nullptr);
  const auto oracle = ruleoracle::three_sigma_label(scenario::zscores(ds.samples[3].features, ds.stats));
  CHECK(promptkit::parse_verdict(*r.text).label ==
        (oracle.label == scenario::Label::anomaly ? promptkit::VerdictLabel::anomaly
                                                  : promptkit::VerdictLabel::normal));
  CHECK(describe(CoinFlip{7}) == "coin-flip(7)");
  CHECK(describe(ReferenceRule{}) == "reference");
}

TEST_CASE("http batch keeps order and bounds in-flight requests") {
  FakeEndpoint server;
  const auto endpoint = server.config(8);
  const auto prompts = numbered_prompts(200);
  const auto batch = run_batch(prompts, HttpEndpoint{}, &endpoint, nullptr);
  REQUIRE(batch.verdicts.size() == 200);
  for (std::size_t i = 0; i < 200; ++i) {
    REQUIRE(batch.completions[i]);
    CHECK(*batch.completions[i] == "normal\necho prompt " + std::to_string(i));
    CHECK(batch.verdicts[i].label == promptkit::VerdictLabel::normal);
  }
  CHECK(batch.network_calls == 200);
  CHECK(server.max_active() <= 8);
  CHECK(server.max_active() >= 1);
  CHECK(server.last_model() == "fake-model");
}

TEST_CASE("cached batch makes no network calls") {
  FakeEndpoint server;
  const auto endpoint = server.config(4);
  const auto dir = testsupport::scratch_dir("cache");
  const auto prompts = numbered_prompts(20, " cached");
  CompletionCache cache(dir);
  const auto first = run_batch(prompts, HttpEndpoint{}, &endpoint, &cache);
  CHECK(first.network_calls == 20);
  const int before = server.requests();
  const auto second = run_batch(prompts, HttpEndpoint{}, &endpoint, &cache);
  CHECK(second.network_calls == 0);
  CHECK(second.cache_hits == 20);
  CHECK(second.completions == first.completions);

  CompletionCache reopened(dir);
  const auto third = run_batch(prompts, HttpEndpoint{}, &endpoint, &reopened);
  CHECK(third.network_calls == 0);
  CHECK(third.completions == first.completions);
  CHECK(server.requests() == before);

  // Temperature is part of the key.
  CHECK(CompletionCache::key("x", "m", 0.0) != CompletionCache::key("x", "m", 0.5));
  const auto key = CompletionCache::key(prompts[0].text, endpoint.model_name, endpoint.temperature);
  CHECK(std::filesystem::exists(dir / key.substr(0, 2) / (key + ".txt")));
}

TEST_CASE("a timing-out prompt becomes one invalid verdict") {
  FakeEndpoint server;
  auto endpoint = server.config(4);
  endpoint.timeout = std::chrono::milliseconds(400);
  endpoint.retries = 0;
  auto prompts = numbered_prompts(12);
  prompts[5].text += " SLOW";
  const auto batch = run_batch(prompts, HttpEndpoint{}, &endpoint, nullptr);
  std::size_t invalid = 0;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (batch.verdicts[i].label == promptkit::VerdictLabel::invalid) {
      ++invalid;
      CHECK(i == 5);
    }
  }
  CHECK(invalid == 1);
  CHECK(batch.errors == 1);
  REQUIRE(batch.log.size() == 1);
  CHECK(batch.log[0].find("sample 5") != std::string::npos);
}

TEST_CASE("server errors: retry on 5xx, fail fast on 4xx") {
  FakeEndpoint server;
  auto endpoint = server.config(1);
  auto prompts = numbered_prompts(2);
  prompts[0].text += " FLAKY";
  prompts[1].text += " TEAPOT";
  const auto batch = run_batch(prompts, HttpEndpoint{}, &endpoint, nullptr);
  CHECK(batch.verdicts[0].label == promptkit::VerdictLabel::normal);
  CHECK(batch.verdicts[1].label == promptkit::VerdictLabel::invalid);
  CHECK(batch.verdicts[1].rationale.find("418") != std::string::npos);
  CHECK(server.requests() == 3);
}

TEST_CASE("unreachable endpoint never throws") {
  EndpointConfig endpoint;
  endpoint.base_url = "http://127.0.0.1:9";
  endpoint.model_name = "nobody";
  endpoint.retries = 0;
  endpoint.timeout = std::chrono::milliseconds(300);
  const auto batch = run_batch(numbered_prompts(3), HttpEndpoint{}, &endpoint, nullptr);
  CHECK(batch.errors == 3);
  for (const auto& v : batch.verdicts) CHECK(v.label == promptkit::VerdictLabel::invalid);
}

TEST_CASE("endpoint configuration") {
  EndpointConfig c;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.base_url = "http://x";
  c.model_name = "m";
  c.validate();
  c.max_in_flight = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.max_in_flight = 1;
  c.temperature = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  CHECK_THROWS_AS(run_batch(numbered_prompts(1), HttpEndpoint{}, nullptr, nullptr), DomainError);
  CHECK_THROWS_AS(run_batch({}, AlwaysNormal{}, nullptr, nullptr), DomainError);
}

TEST_CASE("mock batches are independent of parallelism") {
  const auto& ds = testsupport::default_dataset();
  const auto cfg = promptkit::PromptConfig::make(promptkit::Paradigm::zero_shot, promptkit::Variant::z_only);
  std::vector<PromptBundle> prompts;
  for (int id : ds.test) prompts.push_back(promptkit::render_prompt(ds.sample(id), ds.stats, ds.layout, cfg, {}));
  const auto one = run_batch(prompts, ReferenceRule{}, nullptr, nullptr, 1);
  const auto many = run_batch(prompts, ReferenceRule{}, nullptr, nullptr, 8);
  CHECK(one.completions == many.completions);
}

TEST_CASE("fine-tune export") {
  const auto& ds = testsupport::default_dataset();
  const auto train = ds.split_samples(scenario::Split::train);
  const auto cfg = promptkit::PromptConfig::make(promptkit::Paradigm::finetune_export, promptkit::Variant::z_only);
  const auto jsonl = export_finetune_dataset(train, ds.stats, ds.layout, cfg);
  const auto lines = text::split_lines(jsonl);
  REQUIRE(lines.size() == 1200);
  std::size_t normal = 0;
  std::size_t anomaly = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto j = nlohmann::json::parse(lines[i]);
    const auto& msgs = j.at("messages");
    REQUIRE(msgs.size() == 2);
    CHECK(msgs[0].at("role") == "user");
    CHECK(msgs[1].at("role") == "assistant");
    const auto v = promptkit::parse_verdict(msgs[1].at("content").get<std::string>());
    CHECK(v.parse_mode == promptkit::ParseMode::strict);
    const auto truth = train[i].label;
    CHECK(v.label == (truth == scenario::Label::anomaly ? promptkit::VerdictLabel::anomaly
                                                         : promptkit::VerdictLabel::normal));
    (v.label == promptkit::VerdictLabel::normal ? normal : anomaly) += 1;
    if (i == 0) {
      const auto prompt = promptkit::render_prompt(train[0], ds.stats, ds.layout, cfg, {});
      CHECK(msgs[0].at("content") == prompt.text);
    }
  }
  CHECK(normal == 600);
  CHECK(anomaly == 600);
}

}  // TEST_SUITE
