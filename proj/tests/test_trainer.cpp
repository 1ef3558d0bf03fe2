#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "glyphsmith/checkpoint.hpp"
#include "glyphsmith/error.hpp"
#include "glyphsmith/metrics.hpp"
#include "glyphsmith/rng.hpp"
#include "glyphsmith/synthetic.hpp"
#include "glyphsmith/trainer.hpp"

using namespace glyphsmith;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.model.input_size = 16;
  c.model.channels = {4, 8};
  c.model.groups = 2;
  c.model.hidden = 16;
  c.epochs = 3;
  c.lr_step = 2;
  c.batch_size = 4;
  return c;
}

const std::vector<TrainSample>& small_samples() {
  static const auto s = rasterize_dataset(generate_synthetic(30, 24, *parse_layout("NL01")), 16);
  return s;
}

}  // namespace

TEST(Split, Counts) {
  const SplitIndices s = split_indices(10);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.val.size(), 2u);
  const SplitIndices t = split_indices(600, 500.0 / 600.0, 30);
  EXPECT_EQ(t.train.size(), 500u);
  EXPECT_EQ(t.val.size(), 100u);
  EXPECT_EQ(split_indices(7, 0.5).train.size(), 4u);  // ceil
}

TEST(Split, IsAPermutation) {
  const SplitIndices s = split_indices(100, 0.8, 30);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_EQ(*all.rbegin(), 99u);
}

TEST(Split, SeedDeterminism) {
  EXPECT_EQ(split_indices(100, 0.8, 30).train, split_indices(100, 0.8, 30).train);
  EXPECT_NE(split_indices(100, 0.8, 30).train, split_indices(100, 0.8, 31).train);
}

TEST(Split, MatchesHandRolledShuffle) {
  // Durstenfeld over 0..n-1 with unbiased draws from the same stream.
  SplitMix64 rng(30);
  std::vector<std::size_t> idx(20);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  const SplitIndices s = split_indices(20, 0.8, 30);
  EXPECT_EQ(s.train, std::vector<std::size_t>(idx.begin(), idx.begin() + 16));
  EXPECT_EQ(s.val, std::vector<std::size_t>(idx.begin() + 16, idx.end()));
}

TEST(Split, Errors) {
  EXPECT_THROW(split_indices(1), DataError);
  EXPECT_THROW(split_indices(10, 0.0), ConfigError);
  EXPECT_THROW(split_indices(10, 1.0), ConfigError);
  const auto [a, b] = split(std::vector<int>{1, 2, 3, 4, 5}, 0.6, 1);
  EXPECT_EQ(a.size() + b.size(), 5u);
}

TEST(LearningRate, HalvesEveryStep) {
  TrainConfig c;
  EXPECT_EQ(learning_rate(c, 0), 2e-3);
  EXPECT_EQ(learning_rate(c, 5), 2e-3);
  EXPECT_EQ(learning_rate(c, 6), 1e-3);
  EXPECT_EQ(learning_rate(c, 12), 5e-4);
  EXPECT_EQ(learning_rate(c, 41), 2e-3 / 64);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.lr = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.momentum = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(TrainConfig{}.weights, (LossWeights{1, 1, 5e-2, 1e-8}));
}

TEST(Train, ZeroEpochsKeepsInitialModel) {
  TrainConfig c = small_config();
  c.epochs = 0;
  const auto& s = small_samples();
  const std::vector<TrainSample> tr(s.begin(), s.begin() + 16), val(s.begin() + 16, s.end());
  const TrainResult r = train(c, tr, val);
  const CarModel fresh(c.model, c.seed);
  for (std::size_t i = 0; i < fresh.parameters().size(); ++i) {
    EXPECT_EQ(r.model.parameters()[i].value, fresh.parameters()[i].value);
  }
  const EvalReport e = evaluate(r.model, val);
  EXPECT_EQ(r.baseline_val_mae, e.baseline_mae);
  EXPECT_EQ(e.mae, e.baseline_mae);
  EXPECT_TRUE(r.log.empty());
}

TEST(Train, RunsAreBitIdentical) {
  const TrainConfig c = small_config();
  const auto& s = small_samples();
  const std::vector<TrainSample> tr(s.begin(), s.begin() + 16), val(s.begin() + 16, s.end());
  const TrainResult a = train(c, tr, val), b = train(c, tr, val);
  ASSERT_EQ(a.log.size(), 3u);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.log[i].val_mae, b.log[i].val_mae);
    EXPECT_EQ(format_epoch_log(a.log[i]), format_epoch_log(b.log[i]));
  }
  EXPECT_EQ(a.log[2].lr, 1e-3);
  EXPECT_EQ(a.rng_state, b.rng_state);
  EXPECT_EQ(serialize_checkpoint(a.model, {}), serialize_checkpoint(b.model, {}));
  // Training moved the parameters.
  EXPECT_NE(serialize_checkpoint(a.model, {}), serialize_checkpoint(CarModel(c.model, c.seed), {}));
}

TEST(Train, WarmStartUsesInitAndConfigSwitcher) {
  TrainConfig c = small_config();
  c.epochs = 0;
  c.model.switcher = true;
  const auto& s = small_samples();
  const CarModel init(c.model, 99);
  const TrainResult r = train(c, s, {}, &init);
  EXPECT_TRUE(r.model.config().switcher);
  EXPECT_EQ(r.model.parameters()[0].value, init.parameters()[0].value);
}

TEST(Train, GradClipBoundsTheFirstStep) {
  TrainConfig c = small_config();
  c.epochs = 1;
  c.batch_size = 24;  // one batch, so one step from zero velocity
  c.grad_clip = 1e-3;
  const TrainResult r = train(c, small_samples(), {});
  const CarModel fresh(c.model, c.seed);
  double sq = 0.0;
  for (std::size_t i = 0; i < fresh.parameters().size(); ++i) {
    const auto& a = r.model.parameters()[i].value.data;
    const auto& b = fresh.parameters()[i].value.data;
    for (std::size_t j = 0; j < a.size(); ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
  }
  EXPECT_NEAR(std::sqrt(sq), c.lr * c.grad_clip, 1e-12);

  c.grad_clip = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, NonFiniteLossAborts) {
  const TrainConfig c = small_config();
  std::vector<TrainSample> tr(small_samples().begin(), small_samples().begin() + 4);
  tr[2].target.data[5] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train(c, tr, {}), NumericalError);
}

TEST(Train, EmptyTrainingSetIsDataError) {
  EXPECT_THROW(train(small_config(), {}, {}), DataError);
}

TEST(Train, CallbackSeesEveryEpoch) {
  TrainConfig c = small_config();
  c.epochs = 2;
  int calls = 0;
  train(c, small_samples(), {}, nullptr, [&](const EpochLog& e, const CarModel&) { EXPECT_EQ(e.epoch, ++calls); });
  EXPECT_EQ(calls, 2);
}
