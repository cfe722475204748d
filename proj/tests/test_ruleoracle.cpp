#include <cmath>

#include "doctest.h"
#include "gridsigma/promptkit.hpp"
#include "gridsigma/rng.hpp"
#include "gridsigma/ruleoracle.hpp"
#include "support.hpp"

using namespace gridsigma;
using namespace gridsigma::ruleoracle;
using promptkit::Paradigm;
using promptkit::Variant;
using promptkit::VerdictLabel;

namespace {

VerdictLabel to_verdict(scenario::Label l) {
  return l == scenario::Label::anomaly ? VerdictLabel::anomaly : VerdictLabel::normal;
}

}  // namespace

TEST_SUITE("ruleoracle") {

TEST_CASE("hand cases") {
  std::vector<double> z(68, 0.0);
  z.back() = 3.0;
  auto v = three_sigma_label(z);
  CHECK(v.label == scenario::Label::anomaly);
  CHECK(v.violating == std::vector<std::size_t>{67});

  v = three_sigma_label(std::vector<double>{2.99, -2.999999, 0.0});
  CHECK(v.label == scenario::Label::normal);
  CHECK(v.violating.empty());

  v = three_sigma_label(std::vector<double>{-3.2, 0.0, 3.1});
  CHECK(v.label == scenario::Label::anomaly);
  CHECK(v.violating == std::vector<std::size_t>{0, 2});
  CHECK(v.max_abs_z == 3.2);
  CHECK(v.argmax == 0);

  CHECK(three_sigma_label(std::vector<double>{-3.0}).label == scenario::Label::anomaly);
  CHECK_THROWS_AS(three_sigma_label(std::vector<double>{}), DomainError);
}

TEST_CASE("brute-force equivalence and monotonicity") {
  SeededRng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> z(68);
    for (auto& x : z) x = rng.normal() * 1.4;
    if (trial % 10 == 0) z[rng.below(68)] = (rng.coin() ? 3.0 : -3.0);
    const auto v = three_sigma_label(z);
    bool any = false;
    std::vector<std::size_t> scan;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] >= 3.0 || z[i] <= -3.0) {
        any = true;
        scan.push_back(i);
      }
    }
    REQUIRE((v.label == scenario::Label::anomaly) == any);
    REQUIRE(v.violating == scan);
    if (any) CHECK(v.max_abs_z >= 3.0);

    auto bigger = z;
    const auto i = rng.below(68);
    bigger[i] += (bigger[i] >= 0 ? 1.0 : -1.0) * rng.uniform() * 5.0;
    if (any) CHECK(three_sigma_label(bigger).label == scenario::Label::anomaly);
  }
}

TEST_CASE("rationale format") {
  const std::vector<double> z{0.5, -4.25, 3.5};
  const std::vector<std::string> names{"P_1", "P_2", "P_3"};
  const auto v = three_sigma_label(z);
  CHECK(rule_rationale(v, z, names) == "sensor P_2 |z|=4.2500 exceeds 3.0");
  const std::vector<double> calm{0.5, -1.25};
  const auto text = rule_rationale(three_sigma_label(calm), calm, std::span(names).first(2));
  CHECK(text.find("P_2") != std::string::npos);
}

TEST_CASE("reference agent agrees with the rule on z-bearing prompts for every sample") {
  const auto& ds = testsupport::default_dataset();
  for (auto variant : {Variant::mean_std_value_z, Variant::z_only}) {
    const auto config = promptkit::PromptConfig::make(Paradigm::zero_shot, variant);
    std::size_t agree = 0;
    for (const auto& s : ds.samples) {
      const auto bundle = promptkit::render_prompt(s, ds.stats, ds.layout, config, {});
      const auto verdict = reference_agent(bundle);
      const auto oracle = three_sigma_label(scenario::zscores(s.features, ds.stats));
      CHECK(verdict.parse_mode == promptkit::ParseMode::strict);
      agree += promptkit::parse_verdict(verdict.raw).label == to_verdict(oracle.label) ? 1 : 0;
      if (oracle.label == scenario::Label::anomaly && variant == Variant::z_only) {
        CHECK(verdict.rationale.find(ds.layout.entries[oracle.violating.front()].name) !=
              std::string::npos);
      }
    }
    CHECK(agree == ds.samples.size());
  }
}

TEST_CASE("reference agent on value/mean/std prompts matches the rule across the test split") {
  const auto& ds = testsupport::default_dataset();
  const auto config = promptkit::PromptConfig::make(Paradigm::zero_shot, Variant::mean_std_value);
  std::size_t agree = 0;
  for (int id : ds.test) {
    const auto& s = ds.sample(id);
    const auto bundle = promptkit::render_prompt(s, ds.stats, ds.layout, config, {});
    const auto oracle = three_sigma_label(scenario::zscores(s.features, ds.stats));
    agree += reference_agent(bundle).label == to_verdict(oracle.label) ? 1 : 0;
  }
  CHECK(agree == ds.test.size());
}

TEST_CASE("corrupted table yields an invalid verdict") {
  const auto& ds = testsupport::default_dataset();
  auto bundle = promptkit::render_prompt(ds.samples[0], ds.stats, ds.layout,
                                         promptkit::PromptConfig::make(Paradigm::zero_shot, Variant::z_only), {});
  const auto pos = bundle.text.find("P_3 | ");
  REQUIRE(pos != std::string::npos);
  bundle.text.replace(pos, 6, "P_3 | x");
  const auto v = reference_agent(bundle);
  CHECK(v.label == VerdictLabel::invalid);
  CHECK(v.parse_mode == promptkit::ParseMode::failed);
  CHECK(v.rationale.find("unparseable") != std::string::npos);
}

}  // TEST_SUITE
