// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "golden_cases.hpp"
#include "gradcheck.hpp"
#include "gridsigma/cli.hpp"
#include "gridsigma/evalkit.hpp"
#include "gridsigma/ruleoracle.hpp"
#include "gridsigma/text.hpp"
#include "reference_solver.hpp"
#include "support.hpp"

using namespace gridsigma;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double f1_of(const std::vector<scenario::Label>& p, const std::vector<scenario::Label>& t) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool pa = p[i] == scenario::Label::anomaly;
    const bool ta = t[i] == scenario::Label::anomaly;
    tp += pa && ta;
    fp += pa && !ta;
    fn += !pa && ta;
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

Outcome power_flow() {
  const auto c = grid::builtin_ieee14();
  const std::vector<double> unit(14, 1.0);
  const auto t0 = Clock::now();
  const auto sol = grid::solve_newton(c, unit);
  const double secs = seconds_since(t0);
  const auto ref = testsupport::gauss_seidel(c, unit);
  double dv = 0.0, da = 0.0;
  for (std::size_t i = 0; i < 14; ++i) {
    dv = std::max(dv, std::abs(sol.v_mag[i] - ref.v_mag[i]));
    da = std::max(da, std::abs(sol.v_ang[i] - ref.v_ang[i]));
  }
  Outcome o;
  o.pass = ref.converged && sol.iterations <= 10 && sol.max_mismatch <= 1e-8 && dv <= 1e-6 && da <= 1e-6 &&
           secs < 1.0;
  o.detail = std::to_string(sol.iterations) + " iterations, mismatch " + fmt("%.2e", sol.max_mismatch) +
             " pu, max |dV| " + fmt("%.2e", dv) + " pu, max |dtheta| " + fmt("%.2e", da) +
             " rad vs Gauss-Seidel, " + fmt("%.4f", secs) + " s";
  return o;
}

Outcome oracle_equivalence() {
  SeededRng rng(20240601);
  const auto t0 = Clock::now();
  std::size_t agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> z(68);
    for (auto& v : z) v = rng.normal() * 1.3;
    if (trial % 8 == 0) z[rng.below(68)] = rng.coin() ? 3.0 : -3.0;
    const auto verdict = ruleoracle::three_sigma_label(z);
    bool scan = false;
    for (std::size_t i = 0; i < z.size(); ++i) scan = scan || z[i] >= 3.0 || -z[i] >= 3.0;
    agree += (verdict.label == scenario::Label::anomaly) == scan ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {agree == 1000 && secs < 1.0,
          std::to_string(agree) + "/1000 random vectors agree, " + fmt("%.4f", secs) + " s"};
}

Outcome rule_fidelity() {
  const auto& ds = testsupport::default_dataset();
  const auto t0 = Clock::now();
  std::size_t agree = 0, total = 0;
  for (auto variant : {promptkit::Variant::mean_std_value_z, promptkit::Variant::z_only}) {
    evalkit::RunConfig run;
    run.paradigm = promptkit::Paradigm::zero_shot;
    run.variant = variant;
    run.agent = agents::ReferenceRule{};
    const auto out = evalkit::run_experiment(run, ds);
    for (const auto& s : out.samples) {
      const auto oracle = ruleoracle::three_sigma_label(scenario::zscores(ds.sample(s.id).features, ds.stats));
      const auto expected = oracle.label == scenario::Label::anomaly ? promptkit::VerdictLabel::anomaly
                                                                     : promptkit::VerdictLabel::normal;
      agree += s.label == expected ? 1 : 0;
      ++total;
    }
  }
  const double secs = seconds_since(t0);
  return {agree == total && total == 2 * ds.test.size() && secs < 10.0,
          std::to_string(agree) + "/" + std::to_string(total) + " test prompts (variants 3 and 4) agree, " +
              fmt("%.3f", secs) + " s"};
}

Outcome metric_identities() {
  const double a = *evalkit::f1_from(0.965, 0.980);
  const double b = *evalkit::f1_from(0.980, 0.803);
  const double l = *evalkit::lift(0.883, 0.972);
  const bool pass = std::abs(a - 0.972) <= 0.0005 && std::abs(b - 0.883) <= 0.0005 && std::abs(l - 0.1008) <= 0.001;
  return {pass, "F1 " + fmt("%.5f", a) + " and " + fmt("%.5f", b) + ", lift " + fmt("%.3f", l * 100.0) + "%"};
}

struct Trained {
  detectors::DetectorModel model;
  double test_f1 = 0.0;
  double seconds = 0.0;
  std::size_t epochs = 0;
};

const Trained& trained() {
  static const Trained t = [] {
    const auto& ds = testsupport::default_dataset();
    const auto t0 = Clock::now();
    std::vector<scenario::Sample> normals, val_normals;
    for (const auto& s : ds.split_samples(scenario::Split::train)) {
      if (s.label == scenario::Label::normal) normals.push_back(s);
    }
    const auto validation = ds.split_samples(scenario::Split::validation);
    for (const auto& s : validation) {
      if (s.label == scenario::Label::normal) val_normals.push_back(s);
    }
    auto r = detectors::train_autoencoder(normals, val_normals, ds.stats, {}, testsupport::kSeed);
    r.model.threshold = detectors::calibrate_threshold(r.model, validation);
    std::vector<scenario::Label> p, truth;
    for (const auto& s : ds.split_samples(scenario::Split::test)) {
      p.push_back(detectors::detect(r.model, s.features));
      truth.push_back(s.label);
    }
    return Trained{r.model, f1_of(p, truth), seconds_since(t0), r.report.train_loss.size()};
  }();
  return t;
}

Outcome detector_learning() {
  const auto& t = trained();
  return {t.test_f1 >= 0.80 && t.seconds < 120.0,
          "test F1 " + fmt("%.4f", t.test_f1) + " (floor 0.80), " + std::to_string(t.epochs) + " epochs, " +
              fmt("%.2f", t.seconds) + " s"};
}

Outcome hybrid_dominance() {
  const auto& ds = testsupport::default_dataset();
  const auto t0 = Clock::now();
  const auto& model = trained().model;
  const double tau_h =
      detectors::calibrate_hybrid(model, ds.split_samples(scenario::Split::validation), ds.stats, 8);
  std::vector<scenario::Label> hp, truth;
  for (const auto& s : ds.split_samples(scenario::Split::test)) {
    const auto sel = detectors::reference_selector(scenario::zscores(s.features, ds.stats), 8);
    hp.push_back(detectors::hybrid_detect(model, sel, tau_h, s.features));
    truth.push_back(s.label);
  }
  const double hybrid_f1 = f1_of(hp, truth);
  const double secs = seconds_since(t0);
  return {hybrid_f1 >= trained().test_f1 && secs < 60.0,
          "hybrid F1 " + fmt("%.4f", hybrid_f1) + " vs detector F1 " + fmt("%.4f", trained().test_f1) + ", " +
              fmt("%.3f", secs) + " s"};
}

Outcome gradient() {
  const auto t0 = Clock::now();
  const auto r = testsupport::gradient_check(99, 100);
  const double secs = seconds_since(t0);
  return {r.probes == 100 && r.max_rel_error < 1e-4 && secs < 5.0,
          "max relative error " + fmt("%.2e", r.max_rel_error) + " over " + std::to_string(r.probes) + " probes, " +
              fmt("%.4f", secs) + " s"};
}

Outcome injection_audit() {
  const auto& ds = testsupport::default_dataset();
  const auto t0 = Clock::now();
  const auto grid_case = grid::builtin_ieee14();
  const auto profile = scenario::synth_load_profile(1800, 14, testsupport::kSeed);
  std::size_t bad = 0, anomalies = 0;
  for (const auto& s : ds.samples) {
    const auto base = scenario::measure(grid_case, ds.layout, profile.row(static_cast<std::size_t>(s.hour)));
    std::set<std::size_t> inj(s.injected.begin(), s.injected.end());
    if (s.label == scenario::Label::anomaly) {
      ++anomalies;
      if (s.injected.size() != 3 || inj.size() != 3) ++bad;
    } else if (!s.injected.empty()) {
      ++bad;
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double d = s.features[i] - base[i];
      if (!inj.count(i)) {
        bad += s.features[i] != base[i] ? 1 : 0;
      } else {
        bad += std::abs(d) < std::max(0.15 * std::abs(base[i]), 0.05) * (1.0 - 1e-12) ? 1 : 0;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && anomalies == ds.samples.size() / 2 && secs < 1.0,
          std::to_string(anomalies) + " anomalous of " + std::to_string(ds.samples.size()) + " samples, " +
              std::to_string(bad) + " violations, " + fmt("%.3f", secs) + " s"};
}

Outcome prompt_stability() {
  std::size_t matched = 0;
  const auto cases = testsupport::golden_cases();
  for (const auto& g : cases) {
    const auto first = testsupport::render_golden(g);
    const auto second = testsupport::render_golden(g);
    const auto path = testsupport::golden_dir() / g.file;
    const bool ok = first == second && std::filesystem::exists(path) && text::read_file(path.string()) == first;
    matched += ok ? 1 : 0;
  }
  const auto& ds = testsupport::default_dataset();
  auto cols = [&](promptkit::Variant v) {
    const auto t = promptkit::parse_value_block(
        promptkit::render_value_block(ds.samples[0].features, ds.stats, ds.layout, v));
    return std::set<std::string>(t.columns.begin(), t.columns.end());
  };
  auto strict_subset = [](const std::set<std::string>& a, const std::set<std::string>& b) {
    return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  const auto c1 = cols(promptkit::Variant::value);
  const auto c2 = cols(promptkit::Variant::mean_std_value);
  const auto c3 = cols(promptkit::Variant::mean_std_value_z);
  const auto c4 = cols(promptkit::Variant::z_only);
  const bool nested = strict_subset(c1, c2) && strict_subset(c2, c3) && !c4.count("mean") && !c4.count("std");
  return {matched == cases.size() && nested,
          std::to_string(matched) + "/" + std::to_string(cases.size()) +
              " golden snapshots byte-identical; column nesting " + (nested ? "holds" : "broken")};
}

Outcome determinism() {
  const auto t0 = Clock::now();
  std::vector<std::map<std::string, std::string>> runs;
  std::vector<std::string> stdouts;
  for (int pass = 0; pass < 2; ++pass) {
    const auto dir = testsupport::scratch_dir("acceptance_pipeline_" + std::to_string(pass));
    const auto data = (dir / "data").string();
    std::ostringstream out, err;
    const std::vector<std::vector<std::string>> steps = {
        {"generate", "--samples", "1600", "--seed", "42", "--out", data},
        {"train-dl", "--data", data, "--seed", "42"},
        {"run", "--data", data, "--paradigm", "zero-shot", "--variant", "z_only", "--agent", "reference"},
        {"run", "--data", data, "--paradigm", "zero-shot", "--variant", "value", "--agent", "reference"},
        {"run", "--data", data, "--paradigm", "few-shot", "--variant", "z_only", "--agent", "coin-flip", "--seed", "7"},
        {"run", "--data", data, "--paradigm", "icl", "--variant", "z_only", "--agent", "always-normal"},
        {"hybrid", "--data", data, "--agent", "reference"},
        {"report", "--data", data, "--table", "hybrid", "--out", (dir / "table3.md").string(), "--format", "md"},
        {"report", "--data", data, "--table", "variants", "--out", (dir / "table1.txt").string()},
    };
    for (const auto& step : steps) {
      if (cli::run(step, out, err) != 0) return {false, "pipeline step '" + step[0] + "' failed: " + err.str()};
    }
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
      if (e.is_regular_file()) files[std::filesystem::relative(e.path(), dir).generic_string()] = text::read_file(e.path().string());
    }
    runs.push_back(std::move(files));
    std::string o = out.str();
    // Printed paths differ only by the scratch directory name.
    for (auto pos = o.find(dir.generic_string()); pos != std::string::npos; pos = o.find(dir.generic_string())) {
      o.replace(pos, dir.generic_string().size(), "<dir>");
    }
    stdouts.push_back(o);
  }
  const bool same = runs[0] == runs[1] && stdouts[0] == stdouts[1];
  return {same && runs[0].size() >= 10,
          std::to_string(runs[0].size()) + " artifacts per run, " + (same ? "byte-identical" : "DIFFERENT") + ", " +
              fmt("%.2f", seconds_since(t0)) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"power-flow correctness", power_flow},
      {"oracle brute-force equivalence", oracle_equivalence},
      {"end-to-end rule fidelity", rule_fidelity},
      {"metric identities", metric_identities},
      {"detector learning", detector_learning},
      {"hybrid dominance", hybrid_dominance},
      {"gradient check", gradient},
      {"injection audit", injection_audit},
      {"prompt stability", prompt_stability},
      {"determinism", determinism},
  };
  // Dataset construction is shared setup, not part of any timed criterion.
  testsupport::default_dataset();
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
