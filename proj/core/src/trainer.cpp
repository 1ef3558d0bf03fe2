#include "glyphsmith/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "glyphsmith/error.hpp"
#include "glyphsmith/metrics.hpp"
#include "glyphsmith/rng.hpp"

namespace glyphsmith {

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (lr_step <= 0) throw ConfigError("lr_step must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be non-negative");
  weights.validate();
  model.validate();
}

std::string TrainConfig::to_json() const {
  nlohmann::json j;
  j["layout"] = layout_tag(layout);
  j["lr"] = lr;
  j["momentum"] = momentum;
  j["epochs"] = epochs;
  j["lr_step"] = lr_step;
  j["batch_size"] = batch_size;
  j["weights"] = {weights.pixel, weights.overlap, weights.centroid, weights.inertia};
  j["seed"] = seed;
  j["rescale_weights"] = rescale_weights;
  j["augment_flip"] = augment_flip;
  j["grad_clip"] = grad_clip;
  return j.dump();
}

LossWeights table_loss_weights(const Layout& layout) {
  if (layout.kind == LayoutKind::NL03) return {1.0, 1.0, 5e-2, 1e-8};
  return {1.0, 1.0, 0.0, 0.0};
}

double learning_rate(const TrainConfig& config, int epoch) {
  return config.lr * std::pow(0.5, epoch / config.lr_step);
}

SplitIndices split_indices(std::size_t n, double ratio, std::uint64_t seed) {
  if (n < 2) throw DataError("split needs at least 2 items");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SplitMix64 rng(seed);
  fisher_yates(std::span<std::size_t>(idx), rng);
  // Tolerate representation error in ratio * n (e.g. 5/6 * 600).
  const double want = ratio * static_cast<double>(n);
  auto n_train = static_cast<std::size_t>(std::ceil(want - 1e-9 * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  SplitIndices s;
  s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return s;
}

std::string format_epoch_log(const EpochLog& log) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch=%d lr=%.9g train_loss=%.9g val_mae=%.9g", log.epoch, log.lr, log.train_loss,
                log.val_mae);
  return buf;
}

namespace {

Raster flip_horizontal(const Raster& r) {
  Raster out(r.width, r.height);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) out.at(r.width - 1 - x, y) = r.at(x, y);
  }
  return out;
}

bool all_finite(const ParamGrads& g) {
  for (const auto& t : g) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const CarModel* init, const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  for (const auto& s : train_set) {
    if (s.components.size() != static_cast<std::size_t>(config.model.components)) {
      throw DataError("training samples must all carry " + std::to_string(config.model.components) + " components");
    }
  }

  TrainResult result{init ? *init : CarModel(config.model, config.seed), {}, 0.0, 0, config.lr, 0};
  CarModel& model = result.model;
  if (init) model.set_switcher(config.model.switcher);
  const LossWeights weights = config.rescale_weights ? config.weights.rescaled_for(model.config().input_size)
                                                     : config.weights;
  SplitMix64 rng(config.seed);
  ParamGrads velocity = model.zero_grads();

  if (!val_set.empty()) result.baseline_val_mae = evaluate(model, val_set).mae;

  std::vector<std::size_t> order(train_set.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = learning_rate(config, epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    fisher_yates(std::span<std::size_t>(order), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      ParamGrads grads = model.zero_grads();
      for (std::size_t b = start; b < end; ++b) {
        const TrainSample& s = train_set[order[b]];
        LossBreakdown loss;
        if (config.augment_flip && rng.below(2) == 1) {
          std::vector<Raster> flipped;
          for (const auto& c : s.components) flipped.push_back(flip_horizontal(c));
          loss = model.loss_and_gradient(flipped, flip_horizontal(s.target), weights, &grads);
        } else {
          loss = model.loss_and_gradient(s.components, s.target, weights, &grads);
        }
        if (!std::isfinite(loss.total)) {
          std::string batch;
          for (std::size_t k = start; k < end; ++k) batch += " " + std::to_string(order[k]);
          throw NumericalError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", sample " +
                               std::to_string(order[b]) + "; batch:" + batch);
        }
        loss_sum += loss.total;
      }
      if (!all_finite(grads)) {
        std::string batch;
        for (std::size_t k = start; k < end; ++k) batch += " " + std::to_string(order[k]);
        throw NumericalError("non-finite gradient at epoch " + std::to_string(epoch + 1) + "; batch:" + batch);
      }
      double inv = 1.0 / static_cast<double>(end - start);
      if (config.grad_clip > 0.0) {
        double sq = 0.0;
        for (const auto& g : grads) {
          for (double v : g.data) sq += v * v;
        }
        const double norm = std::sqrt(sq) * inv;
        if (norm > config.grad_clip) inv *= config.grad_clip / norm;
      }
      auto& params = model.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto& v = velocity[p].data;
        auto& w = params[p].value.data;
        const auto& g = grads[p].data;
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = config.momentum * v[i] + g[i] * inv;
          w[i] -= lr * v[i];
        }
      }
    }
    EpochLog log;
    log.epoch = epoch + 1;
    log.lr = lr;
    log.train_loss = loss_sum / static_cast<double>(train_set.size());
    log.val_mae = val_set.empty() ? 0.0 : evaluate(model, val_set).mae;
    result.log.push_back(log);
    result.epochs_run = epoch + 1;
    result.final_lr = lr;
    if (on_epoch) on_epoch(log, model);
  }
  result.rng_state = rng.state();
  return result;
}

}  // namespace glyphsmith
