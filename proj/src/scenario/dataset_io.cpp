#include <fstream>
#include "json.hpp"
#include <sstream>

#include "gridsigma/scenario.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::scenario {

using nlohmann::json;

namespace {

std::string_view kind_name(grid::SensorKind k) {
  switch (k) {
    case grid::SensorKind::p_inj: return "p_inj";
    case grid::SensorKind::q_inj: return "q_inj";
    case grid::SensorKind::p_flow: return "p_flow";
    case grid::SensorKind::q_flow: return "q_flow";
    case grid::SensorKind::v_mag: return "v_mag";
  }
  return "?";
}

grid::SensorKind kind_from_name(const std::string& s) {
  if (s == "p_inj") return grid::SensorKind::p_inj;
  if (s == "q_inj") return grid::SensorKind::q_inj;
  if (s == "p_flow") return grid::SensorKind::p_flow;
  if (s == "q_flow") return grid::SensorKind::q_flow;
  if (s == "v_mag") return grid::SensorKind::v_mag;
  throw DomainError("unknown sensor kind '" + s + "'");
}

json stats_json(const FeatureStats& s) {
  return json{{"mean", s.mean}, {"std", s.std}, {"n", s.n}, {"split", s.split}};
}

}  // namespace

std::string sample_to_jsonl(const Sample& s, Split split) {
  json j = {{"id", s.id},
            {"hour", s.hour},
            {"label", to_string(s.label)},
            {"split", to_string(split)},
            {"injected", s.injected},
            {"deltas", s.deltas},
            {"features", s.features}};
  return j.dump();
}

std::string stats_to_json(const FeatureStats& stats) { return stats_json(stats).dump(2) + "\n"; }

FeatureStats stats_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    FeatureStats s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std = j.at("std").get<std::vector<double>>();
    s.n = j.at("n").get<std::size_t>();
    s.split = j.at("split").get<std::string>();
    if (s.mean.size() != s.std.size()) throw DomainError("stats mean/std length mismatch");
    return s;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed stats document: ") + e.what());
  }
}

std::string features_csv(const Dataset& ds) {
  std::ostringstream os;
  os << "id,hour,split,label";
  for (const auto& e : ds.layout.entries) os << ',' << e.name;
  os << '\n';
  std::vector<std::string_view> split_of(ds.samples.size());
  for (Split sp : {Split::train, Split::validation, Split::test}) {
    for (int id : ds.ids(sp)) split_of[static_cast<std::size_t>(id)] = to_string(sp);
  }
  for (const auto& s : ds.samples) {
    os << s.id << ',' << s.hour << ',' << split_of[static_cast<std::size_t>(s.id)] << ','
       << to_string(s.label);
    for (double x : s.features) os << ',' << text::exact(x);
    os << '\n';
  }
  return os.str();
}

std::vector<std::filesystem::path> save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<Split> split_of(ds.samples.size(), Split::train);
  for (Split sp : {Split::validation, Split::test}) {
    for (int id : ds.ids(sp)) split_of[static_cast<std::size_t>(id)] = sp;
  }
  std::string jsonl;
  for (const auto& s : ds.samples) {
    jsonl += sample_to_jsonl(s, split_of[static_cast<std::size_t>(s.id)]);
    jsonl += '\n';
  }

  json layout = json::array();
  for (const auto& e : ds.layout.entries) {
    layout.push_back({{"name", e.name}, {"kind", kind_name(e.kind)}, {"index", e.index}});
  }
  json meta = {{"master_seed", ds.master_seed},
               {"sizes", {{"train", ds.sizes.train}, {"validation", ds.sizes.validation}, {"test", ds.sizes.test}}},
               {"splits", {{"train", ds.train}, {"validation", ds.validation}, {"test", ds.test}}},
               {"skipped_hours", ds.skipped_hours},
               {"layout", layout}};

  const std::vector<std::pair<std::string, std::string>> files = {
      {"dataset.jsonl", jsonl},
      {"stats.json", stats_to_json(ds.stats)},
      {"meta.json", meta.dump(2) + "\n"},
      {"features.csv", features_csv(ds)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, body] : files) {
    const auto path = dir / name;
    text::write_file(path.string(), body);
    written.push_back(path);
  }
  return written;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto jsonl_path = dir / "dataset.jsonl";
  if (!std::filesystem::exists(jsonl_path)) {
    throw DomainError("dataset missing: " + jsonl_path.string());
  }
  Dataset ds;
  try {
    const json meta = json::parse(text::read_file((dir / "meta.json").string()));
    ds.master_seed = meta.at("master_seed").get<std::uint64_t>();
    ds.sizes.train = meta.at("sizes").at("train").get<std::size_t>();
    ds.sizes.validation = meta.at("sizes").at("validation").get<std::size_t>();
    ds.sizes.test = meta.at("sizes").at("test").get<std::size_t>();
    ds.train = meta.at("splits").at("train").get<std::vector<int>>();
    ds.validation = meta.at("splits").at("validation").get<std::vector<int>>();
    ds.test = meta.at("splits").at("test").get<std::vector<int>>();
    ds.skipped_hours = meta.at("skipped_hours").get<std::vector<int>>();
    for (const auto& e : meta.at("layout")) {
      ds.layout.entries.push_back({e.at("name").get<std::string>(),
                                   kind_from_name(e.at("kind").get<std::string>()),
                                   e.at("index").get<std::size_t>()});
    }

    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(text::read_file(jsonl_path.string()))) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      const json j = json::parse(line);
      Sample s;
      s.id = j.at("id").get<int>();
      s.hour = j.at("hour").get<int>();
      s.label = label_from_string(j.at("label").get<std::string>());
      s.injected = j.at("injected").get<std::vector<std::size_t>>();
      s.deltas = j.at("deltas").get<std::vector<double>>();
      s.features = j.at("features").get<std::vector<double>>();
      if (s.id != static_cast<int>(ds.samples.size())) {
        throw ParseError("sample ids must be consecutive from 0", line_no);
      }
      if (s.features.size() != ds.layout.size()) {
        throw ParseError("feature count does not match layout", line_no);
      }
      ds.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed dataset files: ") + e.what());
  }
  ds.stats = stats_from_json(text::read_file((dir / "stats.json").string()));
  return ds;
}

}  // namespace gridsigma::scenario
