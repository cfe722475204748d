#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridsigma/detectors.hpp"
#include "gridsigma/rng.hpp"

namespace gridsigma::detectors {
namespace {

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;
};

AdamState adam_for(const DetectorModel& m) {
  AdamState s;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    s.mw.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    s.vw.push_back(s.mw.back());
    s.mb.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
    s.vb.push_back(s.mb.back());
  }
  return s;
}

void adam_update(DetectorModel& m, const Gradients& g, AdamState& s, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++s.step;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(s.step));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    s.mw[l] = kBeta1 * s.mw[l] + (1.0 - kBeta1) * g.weights[l];
    s.vw[l] = kBeta2 * s.vw[l] + (1.0 - kBeta2) * g.weights[l].cwiseAbs2();
    m.weights[l].array() -=
        lr * (s.mw[l].array() / c1) / ((s.vw[l].array() / c2).sqrt() + kEps);
    s.mb[l] = kBeta1 * s.mb[l] + (1.0 - kBeta1) * g.biases[l];
    s.vb[l] = kBeta2 * s.vb[l] + (1.0 - kBeta2) * g.biases[l].cwiseAbs2();
    m.biases[l].array() -=
        lr * (s.mb[l].array() / c1) / ((s.vb[l].array() / c2).sqrt() + kEps);
  }
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& x, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(idx[k]));
  return out;
}

}  // namespace

Eigen::MatrixXd DetectorModel::forward(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  const std::size_t layers = weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd a = (weights[l] * h).colwise() + biases[l];
    h = l + 1 < layers ? Eigen::MatrixXd(a.array().tanh()) : a;
  }
  return h;
}

Eigen::MatrixXd DetectorModel::standardize(std::span<const scenario::Sample> samples) const {
  const auto d = static_cast<Eigen::Index>(layer_dims.front());
  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto z = scenario::zscores(samples[j].features, input_stats);
    for (Eigen::Index i = 0; i < d; ++i) x(i, static_cast<Eigen::Index>(j)) = z[static_cast<std::size_t>(i)];
  }
  return x;
}

void DetectorModel::validate() const {
  if (layer_dims.size() < 2) throw DomainError("model needs at least two layers");
  if (weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
    throw DomainError("model layer count mismatch");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != static_cast<Eigen::Index>(layer_dims[l + 1]) ||
        weights[l].cols() != static_cast<Eigen::Index>(layer_dims[l]) ||
        biases[l].size() != static_cast<Eigen::Index>(layer_dims[l + 1])) {
      throw DomainError("weight shape disagrees with layer_dims at layer " + std::to_string(l));
    }
  }
  if (layer_dims.back() != layer_dims.front()) throw DomainError("autoencoder output dim != input dim");
  if (input_stats.mean.size() != layer_dims.front()) throw DomainError("input stats length mismatch");
  if (threshold && !std::isfinite(*threshold)) throw DomainError("threshold is not finite");
}

DetectorModel init_model(std::vector<std::size_t> layer_dims, scenario::FeatureStats input_stats,
                         std::uint64_t seed) {
  DetectorModel m;
  m.layer_dims = std::move(layer_dims);
  m.input_stats = std::move(input_stats);
  m.train_seed = seed;
  SeededRng rng(derive_seed(seed, "ae-init"));
  for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(m.layer_dims[l]);
    const auto fan_out = static_cast<Eigen::Index>(m.layer_dims[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) w(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  m.validate();
  return m;
}

double loss_and_gradient(const DetectorModel& model, const Eigen::MatrixXd& x, Gradients* grad) {
  const std::size_t layers = model.weights.size();
  std::vector<Eigen::MatrixXd> acts{x};  // acts[l] is the input to layer l
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd a = (model.weights[l] * acts.back()).colwise() + model.biases[l];
    acts.push_back(l + 1 < layers ? Eigen::MatrixXd(a.array().tanh()) : a);
  }
  const Eigen::MatrixXd diff = acts.back() - x;
  const double count = static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() / count;
  if (!grad) return loss;

  grad->weights.assign(layers, {});
  grad->biases.assign(layers, {});
  Eigen::MatrixXd delta = (2.0 / count) * diff;  // dL/d(pre-activation) of the output layer
  for (std::size_t l = layers; l-- > 0;) {
    grad->weights[l] = delta * acts[l].transpose();
    grad->biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = model.weights[l].transpose() * delta;
    delta = back.array() * (1.0 - acts[l].array().square());
  }
  return loss;
}

TrainResult train_autoencoder(std::span<const scenario::Sample> normals,
                              std::span<const scenario::Sample> validation_normals,
                              const scenario::FeatureStats& input_stats, const TrainHyper& hyper,
                              std::uint64_t seed, const std::vector<std::size_t>& hidden_dims) {
  if (normals.size() < 100) {
    throw DomainError("autoencoder training needs at least 100 normal samples, got " +
                      std::to_string(normals.size()));
  }
  if (hyper.batch == 0 || hyper.epochs == 0 || !(hyper.lr > 0.0)) {
    throw DomainError("invalid training hyperparameters");
  }
  const std::size_t d = input_stats.mean.size();
  std::vector<std::size_t> dims{d};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(d);

  TrainResult result{init_model(dims, input_stats, seed), {}};
  DetectorModel& model = result.model;
  const Eigen::MatrixXd x = model.standardize(normals);
  const bool early_stop = !validation_normals.empty();
  const Eigen::MatrixXd xv = early_stop ? model.standardize(validation_normals) : Eigen::MatrixXd();

  result.report.initial_loss = loss_and_gradient(model, x, nullptr);
  AdamState adam = adam_for(model);
  SeededRng rng(derive_seed(seed, "ae-shuffle"));
  std::vector<std::size_t> order(normals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  DetectorModel best = model;
  double best_val = INFINITY;
  std::size_t since_best = 0;
  Gradients g;
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t len = std::min(hyper.batch, order.size() - start);
      const Eigen::MatrixXd xb = columns(x, std::span(order).subspan(start, len));
      loss_and_gradient(model, xb, &g);
      adam_update(model, g, adam, hyper.lr);
    }
    const double train_loss = loss_and_gradient(model, x, nullptr);
    if (!std::isfinite(train_loss)) {
      throw DomainError("autoencoder training diverged at epoch " + std::to_string(epoch));
    }
    result.report.train_loss.push_back(train_loss);
    if (!early_stop) continue;

    const double val_loss = loss_and_gradient(model, xv, nullptr);
    result.report.validation_loss.push_back(val_loss);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = model;
      result.report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }
  if (early_stop) {
    model = best;
  } else {
    result.report.best_epoch = result.report.train_loss.size();
  }
  return result;
}

Reconstruction reconstruction_error(const DetectorModel& model, std::span<const double> features) {
  if (features.size() != model.layer_dims.front()) {
    throw DomainError("feature length " + std::to_string(features.size()) +
                      " does not match model input " + std::to_string(model.layer_dims.front()));
  }
  const auto z = scenario::zscores(features, model.input_stats);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  const Eigen::VectorXd out = model.forward(x);
  Reconstruction r;
  r.residuals.resize(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = out(static_cast<Eigen::Index>(i)) - z[i];
    r.residuals[i] = d * d;
    sum += r.residuals[i];
  }
  r.total = sum / static_cast<double>(z.size());
  return r;
}

double calibrate_threshold(std::span<const double> scores, std::span<const scenario::Label> truths) {
  if (scores.size() != truths.size() || scores.empty()) {
    throw DomainError("calibration needs equal-length, non-empty scores and labels");
  }
  std::size_t positives = 0;
  for (auto t : truths) positives += t == scenario::Label::anomaly ? 1 : 0;
  if (positives == 0 || positives == truths.size()) {
    throw DomainError("calibration set must contain both labels");
  }

  // Sweep candidate thresholds from high to low; flagged set grows monotonically.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double best_f1 = -1.0;
  double best_t = scores[order.front()];
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double t = scores[order[k]];
    while (k < order.size() && scores[order[k]] == t) {
      (truths[order[k]] == scenario::Label::anomaly ? tp : fp) += 1;
      ++k;
    }
    const std::size_t fn = positives - tp;
    const double f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    if (f1 >= best_f1) {  // later t is smaller, so >= prefers the smaller threshold on ties
      best_f1 = f1;
      best_t = t;
    }
  }
  return best_t;
}

double calibrate_threshold(const DetectorModel& model, std::span<const scenario::Sample> validation) {
  std::vector<double> scores;
  std::vector<scenario::Label> truths;
  for (const auto& s : validation) {
    scores.push_back(reconstruction_error(model, s.features).total);
    truths.push_back(s.label);
  }
  return calibrate_threshold(scores, truths);
}

scenario::Label detect(const DetectorModel& model, std::span<const double> features) {
  if (!model.threshold) throw DomainError("detector is not calibrated");
  return reconstruction_error(model, features).total >= *model.threshold ? scenario::Label::anomaly
                                                                         : scenario::Label::normal;
}

}  // namespace gridsigma::detectors
