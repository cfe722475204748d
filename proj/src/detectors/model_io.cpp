#include "gridsigma/detectors.hpp"
#include "json.hpp"

namespace gridsigma::detectors {

using nlohmann::json;

std::string model_to_json(const DetectorModel& model) {
  model.validate();
  json j;
  j["layer_dims"] = model.layer_dims;
  j["weights"] = json::array();
  j["biases"] = json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(model.weights[l].cols()));
      for (Eigen::Index c = 0; c < model.weights[l].cols(); ++c) row[static_cast<std::size_t>(c)] = model.weights[l](r, c);
      rows.push_back(row);
    }
    j["weights"].push_back(rows);
    j["biases"].push_back(std::vector<double>(model.biases[l].data(),
                                              model.biases[l].data() + model.biases[l].size()));
  }
  j["input_stats"] = json::parse(scenario::stats_to_json(model.input_stats));
  j["threshold"] = model.threshold ? json(*model.threshold) : json(nullptr);
  j["hybrid_threshold"] = model.hybrid_threshold ? json(*model.hybrid_threshold) : json(nullptr);
  j["hybrid_m"] = model.hybrid_m;
  j["train_seed"] = model.train_seed;
  return j.dump(1) + "\n";
}

DetectorModel model_from_json(std::string_view text) {
  DetectorModel m;
  try {
    const auto j = json::parse(text);
    m.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    if (ws.size() != bs.size()) throw DomainError("model file: weights/biases count mismatch");
    for (std::size_t l = 0; l < ws.size(); ++l) {
      const auto rows = ws[l].get<std::vector<std::vector<double>>>();
      const auto cols = rows.empty() ? 0 : rows.front().size();
      Eigen::MatrixXd w(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw DomainError("model file: ragged weight matrix");
        for (std::size_t c = 0; c < cols; ++c) w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
      m.weights.push_back(std::move(w));
      const auto b = bs[l].get<std::vector<double>>();
      m.biases.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
    }
    m.input_stats = scenario::stats_from_json(j.at("input_stats").dump());
    if (!j.at("threshold").is_null()) m.threshold = j.at("threshold").get<double>();
    if (j.contains("hybrid_threshold") && !j.at("hybrid_threshold").is_null()) {
      m.hybrid_threshold = j.at("hybrid_threshold").get<double>();
    }
    if (j.contains("hybrid_m")) m.hybrid_m = j.at("hybrid_m").get<std::size_t>();
    m.train_seed = j.at("train_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw DomainError(std::string("model file: ") + e.what());
  }
  m.validate();
  return m;
}

}  // namespace gridsigma::detectors
