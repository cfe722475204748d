#include "gridsigma/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "CLI11.hpp"
#include "gridsigma/agents.hpp"
#include "gridsigma/detectors.hpp"
#include "gridsigma/error.hpp"
#include "gridsigma/evalkit.hpp"
#include "gridsigma/grid.hpp"
#include "gridsigma/promptkit.hpp"
#include "gridsigma/scenario.hpp"
#include "gridsigma/text.hpp"
#include "json.hpp"

namespace gridsigma::cli {
namespace {

namespace fs = std::filesystem;
using promptkit::Paradigm;
using promptkit::Variant;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::size_t samples = 1600;
  std::uint64_t seed = 42;
  std::string out;
  std::string data = "data";
  std::string paradigm = "zero-shot";
  std::string variant = "z_only";
  std::string agent = "reference";
  std::size_t k = 0;
  std::size_t m = 8;
  std::string invalid_policy = "as_wrong";
  int sample = -1;
  std::string format = "text";
  std::string table;
  std::string model;
  std::string cache;
  std::string case_file;
  std::string loads;
  bool voltage = false;
  std::vector<std::string> manifests;
};

Paradigm parse_paradigm(const std::string& s) {
  if (s == "hybrid") return Paradigm::hybrid_select;
  if (auto p = promptkit::paradigm_from_string(s)) return *p;
  throw UsageError("unknown paradigm '" + s + "' (zero-shot|few-shot|icl|fine-tuned|hybrid)");
}

Variant parse_variant(const std::string& s) {
  if (auto v = promptkit::variant_from_string(s)) return *v;
  throw UsageError("unknown variant '" + s + "' (value|mean_std_value|mean_std_value_z|z_only)");
}

agents::AgentKind parse_agent(const std::string& s, std::uint64_t seed) {
  if (s == "reference") return agents::ReferenceRule{};
  if (s == "always-normal") return agents::AlwaysNormal{};
  if (s == "coin-flip") return agents::CoinFlip{seed};
  if (s == "http") return agents::HttpEndpoint{};
  throw UsageError("unknown agent '" + s + "' (reference|always-normal|coin-flip|http)");
}

evalkit::TableFormat parse_format(const std::string& s) {
  if (auto f = evalkit::table_format_from_string(s)) return *f;
  throw UsageError("unknown format '" + s + "' (text|md|json)");
}

evalkit::InvalidPolicy parse_policy(const std::string& s) {
  if (auto p = evalkit::invalid_policy_from_string(s)) return *p;
  throw UsageError("unknown invalid policy '" + s + "' (as_wrong|excluded)");
}

void wrote(std::ostream& out, const fs::path& p) { out << "wrote " << p.generic_string() << '\n'; }

void write_artifact(std::ostream& out, const fs::path& p, std::string_view content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  text::write_file(p, content);
  wrote(out, p);
}

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '-';
  }
  return s;
}

grid::GridCase load_case(const Options& o) {
  return o.case_file.empty() ? grid::builtin_ieee14() : grid::parse_case(text::read_file(o.case_file));
}

int cmd_generate(const Options& o, std::ostream& out) {
  if (o.samples == 0 || o.samples % 16 != 0) {
    throw UsageError("--samples must be a positive multiple of 16 (75/12.5/12.5 balanced splits)");
  }
  const auto grid_case = load_case(o);
  const auto layout = grid::default_layout(grid_case, o.voltage);
  scenario::SplitSizes sizes{o.samples * 3 / 4, o.samples / 8, o.samples / 8};
  scenario::LoadProfile profile;
  if (!o.loads.empty()) {
    profile = scenario::ingest_load_csv(text::read_file(o.loads), grid_case.buses.size());
  } else {
    profile = scenario::synth_load_profile(o.samples + o.samples / 8, grid_case.buses.size(), o.seed);
  }
  const auto ds = scenario::build_dataset(grid_case, profile, layout, sizes, o.seed);
  const fs::path dir = o.out.empty() ? fs::path(o.data) : fs::path(o.out);
  for (const auto& p : scenario::save_dataset(ds, dir)) wrote(out, p);
  return 0;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const auto ds = scenario::load_dataset(o.data);
  if (parse_format(o.format) == evalkit::TableFormat::json) {
    out << scenario::stats_to_json(ds.stats);
    return 0;
  }
  out << "feature stats over " << ds.stats.split << " split (n=" << ds.stats.n << ")\n";
  for (std::size_t i = 0; i < ds.layout.size(); ++i) {
    out << ds.layout.entries[i].name << " | mean " << text::fixed(ds.stats.mean[i], 6) << " | std "
        << text::fixed(ds.stats.std[i], 6) << '\n';
  }
  return 0;
}

int cmd_render(const Options& o, std::ostream& out) {
  const auto ds = scenario::load_dataset(o.data);
  evalkit::RunConfig run;
  run.paradigm = parse_paradigm(o.paradigm);
  run.variant = parse_variant(o.variant);
  run.example_seed = o.seed;
  run.k_examples = o.k;
  run.select_m = o.m;
  const auto config = run.prompt_config();
  config.validate();
  const int id = o.sample >= 0 ? o.sample : ds.test.front();
  if (id >= static_cast<int>(ds.samples.size())) throw DomainError("no sample with id " + std::to_string(id));
  const auto& sample = ds.sample(id);
  if (run.paradigm == Paradigm::hybrid_select) {
    out << detectors::selection_prompt(sample, ds.stats, ds.layout, o.m).text;
    return 0;
  }
  const auto train = ds.split_samples(scenario::Split::train);
  const auto examples = promptkit::select_examples(train, ds.stats, config);
  out << promptkit::render_prompt(sample, ds.stats, ds.layout, config, examples).text;
  return 0;
}

void print_run(const evalkit::RunOutcome& r, const std::string& row, evalkit::TableKind kind,
               evalkit::TableFormat format, std::ostream& out) {
  const evalkit::LabeledReport lr{row, r.report};
  out << evalkit::ablation_table(kind, std::span(&lr, 1), format);
  out << "invalid verdicts: " << r.report.invalid_count << " (policy " << to_string(r.report.invalid_policy)
      << "), network calls: " << r.network_calls << ", cache hits: " << r.cache_hits << '\n';
}

std::optional<detectors::DetectorModel> load_model(const Options& o) {
  const fs::path p = o.model.empty() ? fs::path(o.data) / "model.json" : fs::path(o.model);
  if (!fs::exists(p)) throw DomainError("model file " + p.generic_string() + " not found; run train-dl first");
  return detectors::model_from_json(text::read_file(p));
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err, bool hybrid_command) {
  evalkit::RunConfig run;
  run.paradigm = hybrid_command ? Paradigm::hybrid_select : parse_paradigm(o.paradigm);
  run.variant = parse_variant(o.variant);
  run.agent = parse_agent(o.agent, o.seed);
  run.data_dir = o.data;
  run.example_seed = o.seed;
  run.k_examples = o.k;
  run.select_m = o.m;
  run.invalid_policy = parse_policy(o.invalid_policy);
  if (!o.cache.empty()) run.cache_dir = o.cache;
  if (std::holds_alternative<agents::HttpEndpoint>(run.agent)) {
    run.endpoint = agents::EndpointConfig::from_env();
  }
  const auto format = parse_format(o.format);

  const auto ds = scenario::load_dataset(o.data);
  std::optional<detectors::DetectorModel> model;
  if (run.paradigm == Paradigm::hybrid_select) model = load_model(o);
  const auto result = evalkit::run_experiment(run, ds, model ? &*model : nullptr);
  for (const auto& line : result.log) err << line << '\n';

  std::string row;
  evalkit::TableKind kind = evalkit::TableKind::paradigms;
  std::string name;
  if (run.paradigm == Paradigm::hybrid_select) {
    kind = evalkit::TableKind::hybrid;
    row = "LLM + DL";
    name = "hybrid-m" + std::to_string(o.m) + "-" + o.agent;
  } else if (run.paradigm == Paradigm::zero_shot) {
    kind = evalkit::TableKind::variants;
    row = std::string(evalkit::variant_row_label(run.variant));
    name = "zero-shot-" + o.variant + "-" + o.agent;
  } else {
    row = std::string(evalkit::paradigm_row_label(run.paradigm));
    name = std::string(promptkit::to_string(run.paradigm)) + "-" + o.variant + "-" + o.agent;
  }
  const fs::path dir = o.out.empty() ? fs::path(o.data) / "runs" : fs::path(o.out);
  print_run(result, row, kind, format, out);
  write_artifact(out, dir / (sanitize(name) + ".json"), result.manifest);
  return 0;
}

int cmd_train_dl(const Options& o, std::ostream& out) {
  const auto ds = scenario::load_dataset(o.data);
  std::vector<scenario::Sample> normals;
  for (const auto& s : ds.split_samples(scenario::Split::train)) {
    if (s.label == scenario::Label::normal) normals.push_back(s);
  }
  std::vector<scenario::Sample> val_normals;
  const auto validation = ds.split_samples(scenario::Split::validation);
  for (const auto& s : validation) {
    if (s.label == scenario::Label::normal) val_normals.push_back(s);
  }
  auto trained = detectors::train_autoencoder(normals, val_normals, ds.stats, {}, o.seed);
  auto& model = trained.model;
  model.threshold = detectors::calibrate_threshold(model, validation);
  model.hybrid_m = o.m;
  model.hybrid_threshold = detectors::calibrate_hybrid(model, validation, ds.stats, o.m);
  const auto result = evalkit::evaluate_detector(ds, model);

  const auto& rep = trained.report;
  out << "epochs " << rep.train_loss.size() << ", best epoch " << rep.best_epoch << ", train loss "
      << text::fixed(rep.initial_loss, 6) << " -> " << text::fixed(rep.train_loss.back(), 6) << '\n';
  print_run(result, "Traditional DL", evalkit::TableKind::hybrid, parse_format(o.format), out);
  const fs::path model_path = o.model.empty() ? fs::path(o.data) / "model.json" : fs::path(o.model);
  const fs::path runs = o.out.empty() ? fs::path(o.data) / "runs" : fs::path(o.out);
  write_artifact(out, model_path, detectors::model_to_json(model));
  write_artifact(out, runs / "dl.json", result.manifest);
  return 0;
}

int cmd_export_finetune(const Options& o, std::ostream& out) {
  const auto ds = scenario::load_dataset(o.data);
  auto config = promptkit::PromptConfig::make(Paradigm::finetune_export, parse_variant(o.variant));
  const auto train = ds.split_samples(scenario::Split::train);
  const fs::path p = o.out.empty() ? fs::path(o.data) / "finetune.jsonl" : fs::path(o.out);
  write_artifact(out, p, agents::export_finetune_dataset(train, ds.stats, ds.layout, config));
  return 0;
}

// Directory scans keep one agent, and for the paradigm table one variant.
bool scan_matches(const std::string& body, evalkit::TableKind kind, const Options& o) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("method") || !j.contains("config")) return false;
  const auto& cfg = j["config"];
  if (j["method"] == "dl") return kind == evalkit::TableKind::hybrid;
  if (cfg.value("agent", "") != o.agent) return false;
  if (kind == evalkit::TableKind::paradigms && j["method"] == "llm") {
    return cfg.value("variant", "") == o.variant;
  }
  return true;
}

int cmd_report(const Options& o, std::ostream& out) {
  const auto kind_opt = evalkit::table_kind_from_string(o.table);
  if (!kind_opt) throw UsageError("--table must be variants, paradigms or hybrid");
  const auto kind = *kind_opt;
  std::vector<fs::path> files(o.manifests.begin(), o.manifests.end());
  if (files.empty()) {
    const fs::path dir = fs::path(o.data) / "runs";
    if (!fs::is_directory(dir)) throw DomainError("no manifests given and " + dir.generic_string() + " is missing");
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  }
  std::vector<evalkit::LabeledReport> rows;
  const bool explicit_files = !o.manifests.empty();
  for (const auto& f : files) {
    const auto body = text::read_file(f);
    if (!explicit_files && !scan_matches(body, kind, o)) continue;
    try {
      rows.push_back(evalkit::report_from_manifest(body, kind));
    } catch (const DomainError&) {
      // Directory scans skip manifests that do not belong to this table.
      if (explicit_files) throw;
    }
  }
  const auto table = evalkit::ablation_table(kind, rows, parse_format(o.format));
  if (o.out.empty()) {
    out << table;
  } else {
    write_artifact(out, o.out, table);
  }
  return 0;
}

int cmd_export_case(const Options& o, std::ostream& out) {
  const auto text = grid::serialize_case(load_case(o));
  if (o.out.empty()) {
    out << text;
  } else {
    write_artifact(out, o.out, text);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grid telemetry anomaly benchmark: power-flow data, rule-aware prompts, agents and detectors.",
               "gridsigma"};
  app.require_subcommand(1, 1);
  Options o;

  auto* generate = app.add_subcommand("generate", "Solve hourly power flows and write a labeled dataset");
  generate->add_option("--samples", o.samples, "Total samples (multiple of 16)")->capture_default_str();
  generate->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  generate->add_option("--out", o.out, "Output directory (default: data)");
  generate->add_option("--case", o.case_file, "MATPOWER case file (default: built-in IEEE 14-bus)");
  generate->add_option("--loads", o.loads, "Per-bus hourly load multipliers (CSV)");
  generate->add_flag("--voltage", o.voltage, "Append bus voltage magnitudes to the features");

  auto* stats = app.add_subcommand("stats", "Print the train-split feature statistics");
  stats->add_option("--data", o.data, "Dataset directory")->capture_default_str();
  stats->add_option("--format", o.format, "text|json")->capture_default_str();

  auto* render = app.add_subcommand("render", "Print the prompt for one sample");
  auto* run_cmd = app.add_subcommand("run", "Prompt every test sample and score the verdicts");
  for (auto* c : {render, run_cmd}) {
    c->add_option("--data", o.data, "Dataset directory")->capture_default_str();
    c->add_option("--paradigm", o.paradigm, "zero-shot|few-shot|icl|fine-tuned|hybrid")->capture_default_str();
    c->add_option("--variant", o.variant, "value|mean_std_value|mean_std_value_z|z_only")->capture_default_str();
    c->add_option("--k", o.k, "Example count (default per paradigm)");
    c->add_option("--m", o.m, "Sensors requested by selection prompts")->capture_default_str();
    c->add_option("--seed", o.seed, "Example-selection and coin-flip seed")->capture_default_str();
  }
  render->add_option("--sample", o.sample, "Sample id (default: first test sample)");
  auto* hybrid = app.add_subcommand("hybrid", "LLM feature selection gating the trained detector");
  hybrid->add_option("--data", o.data, "Dataset directory")->capture_default_str();
  hybrid->add_option("--m", o.m, "Sensors selected per sample")->capture_default_str();
  hybrid->add_option("--seed", o.seed, "Coin-flip seed")->capture_default_str();
  for (auto* c : {run_cmd, hybrid}) {
    c->add_option("--agent", o.agent, "reference|always-normal|coin-flip|http")->capture_default_str();
    c->add_option("--invalid-policy", o.invalid_policy, "as_wrong|excluded")->capture_default_str();
    c->add_option("--format", o.format, "text|md|json")->capture_default_str();
    c->add_option("--out", o.out, "Manifest directory (default: <data>/runs)");
    c->add_option("--model", o.model, "Detector model (default: <data>/model.json)");
    c->add_option("--cache", o.cache, "Completion cache directory");
  }

  auto* train = app.add_subcommand("train-dl", "Train, calibrate and evaluate the autoencoder detector");
  train->add_option("--data", o.data, "Dataset directory")->capture_default_str();
  train->add_option("--seed", o.seed, "Training seed")->capture_default_str();
  train->add_option("--m", o.m, "Selection size for the hybrid threshold")->capture_default_str();
  train->add_option("--model", o.model, "Model output (default: <data>/model.json)");
  train->add_option("--out", o.out, "Manifest directory (default: <data>/runs)");
  train->add_option("--format", o.format, "text|md|json")->capture_default_str();

  auto* finetune = app.add_subcommand("export-finetune", "Write chat-format training records for the train split");
  finetune->add_option("--data", o.data, "Dataset directory")->capture_default_str();
  finetune->add_option("--variant", o.variant, "Value Block variant")->capture_default_str();
  finetune->add_option("--out", o.out, "Output file (default: <data>/finetune.jsonl)");

  auto* report = app.add_subcommand("report", "Tabulate run manifests");
  report->add_option("--table", o.table, "variants|paradigms|hybrid")->required();
  report->add_option("--data", o.data, "Dataset directory whose runs/ is scanned")->capture_default_str();
  report->add_option("--format", o.format, "text|md|json")->capture_default_str();
  report->add_option("--agent", o.agent, "Agent whose runs a directory scan keeps")->capture_default_str();
  report->add_option("--variant", o.variant, "Variant kept for the paradigm table")->capture_default_str();
  report->add_option("--out", o.out, "Write the table to this file");
  report->add_option("manifests", o.manifests, "Manifest files (default: <data>/runs/*.json)");

  auto* export_case = app.add_subcommand("export-case", "Write a case in MATPOWER format");
  export_case->add_option("--case", o.case_file, "Input case (default: built-in IEEE 14-bus)");
  export_case->add_option("--out", o.out, "Output file (default: standard output)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (generate->parsed()) return cmd_generate(o, out);
    if (stats->parsed()) return cmd_stats(o, out);
    if (render->parsed()) return cmd_render(o, out);
    if (run_cmd->parsed()) return cmd_run(o, out, err, false);
    if (hybrid->parsed()) return cmd_run(o, out, err, true);
    if (train->parsed()) return cmd_train_dl(o, out);
    if (finetune->parsed()) return cmd_export_finetune(o, out);
    if (report->parsed()) return cmd_report(o, out);
    if (export_case->parsed()) return cmd_export_case(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace gridsigma::cli
