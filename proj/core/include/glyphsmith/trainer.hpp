#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "glyphsmith/car_model.hpp"
#include "glyphsmith/decomp_table.hpp"
#include "glyphsmith/losses.hpp"
#include "glyphsmith/synthetic.hpp"

namespace glyphsmith {

/// (1, 1, 5e-2, 1e-8) for every layout. An extractor trained from scratch
/// collapses to shrunken content without the moment terms.
constexpr LossWeights default_loss_weights() { return {1.0, 1.0, 5e-2, 1e-8}; }

struct TrainConfig {
  Layout layout{LayoutKind::NL01, std::nullopt};
  double lr = 2e-3;
  double momentum = 0.9;
  int epochs = 42;
  int lr_step = 6;  // halve the rate every lr_step epochs
  std::size_t batch_size = 16;
  LossWeights weights = default_loss_weights();
  std::uint64_t seed = 30;
  ModelConfig model;
  /// Rescale centroid/inertia weights from 256 px to model.input_size.
  bool rescale_weights = true;
  /// Flip every component and the target horizontally together with
  /// probability 1/2 per sample.
  bool augment_flip = false;
  /// Scale the batch-mean gradient down to this global L2 norm when it is
  /// larger; 0 disables.
  double grad_clip = 5.0;

  /// Throws ConfigError.
  void validate() const;
  std::string to_json() const;
};

/// Per-layout weights of the original setup: NL03 (1, 1, 5e-2, 1e-8), all
/// others (1, 1, 0, 0). That setup assumes a pretrained extractor.
LossWeights table_loss_weights(const Layout& layout);

/// lr * 0.5^floor(epoch / lr_step), epochs counted from 0.
double learning_rate(const TrainConfig& config, int epoch);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

/// Fisher-Yates over 0..n-1 driven by SplitMix64(seed); the first
/// ceil(ratio * n) indices train, the rest validate. Throws DataError for
/// n < 2 and ConfigError for a ratio outside (0, 1).
SplitIndices split_indices(std::size_t n, double ratio = 0.8, std::uint64_t seed = 30);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(const std::vector<T>& items, double ratio = 0.8, std::uint64_t seed = 30) {
  const SplitIndices s = split_indices(items.size(), ratio, seed);
  std::pair<std::vector<T>, std::vector<T>> out;
  for (auto i : s.train) out.first.push_back(items[i]);
  for (auto i : s.val) out.second.push_back(items[i]);
  return out;
}

struct EpochLog {
  int epoch = 0;  // 1-based count of completed epochs
  double lr = 0.0;
  double train_loss = 0.0;
  double val_mae = 0.0;
};

/// "epoch=3 lr=0.002 train_loss=0.0123 val_mae=0.0456"
std::string format_epoch_log(const EpochLog& log);

struct TrainResult {
  CarModel model;
  std::vector<EpochLog> log;
  double baseline_val_mae = 0.0;  // before the first update
  int epochs_run = 0;
  double final_lr = 0.0;
  std::uint64_t rng_state = 0;
};

using EpochCallback = std::function<void(const EpochLog&, const CarModel&)>;

/// SGD with momentum on loss_total over mini-batches. Batches are drawn
/// from a per-epoch shuffle of the run's SplitMix64 stream; per-sample
/// gradients are summed in batch order and averaged. Starts from `init`
/// when given (its switcher flag is replaced by config.model.switcher).
/// Throws DataError for an empty training set and NumericalError when a
/// loss or gradient stops being finite.
TrainResult train(const TrainConfig& config, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const CarModel* init = nullptr,
                  const EpochCallback& on_epoch = {});

}  // namespace glyphsmith
