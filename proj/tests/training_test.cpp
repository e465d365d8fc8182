/*
 * Copyright 2026 The escounts Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "escounts/training.hpp"

#include <cmath>
#include <filesystem>

#include "gtest/gtest.h"
#include "support/gradcheck.hpp"
#include "support/params.hpp"

namespace escounts {
namespace {

std::vector<CorpusItem> ToyCorpus(std::size_t n, std::uint64_t seed) {
  std::vector<CorpusItem> corpus;
  for (std::size_t i = 0; i < n; ++i) {
    SyntheticSpec spec;
    spec.count_min = 2;
    spec.count_max = 4;
    spec.max_windows = 12;
    spec.seed = seed + i;
    spec.class_label = i % 2 ? "a" : "b";
    spec.motif_seed = i % 2 ? 1 : 2;
    spec.video_id = "toy" + std::to_string(i);
    auto [seq, ann] = SynthSequence(spec);
    ann.video_id = spec.video_id;
    ann.class_label = spec.class_label;
    corpus.push_back({std::move(seq), std::move(ann)});
  }
  return corpus;
}

TEST(Loss, PerfectPredictionIsZero) {
  RepetitionAnnotation ann;
  ann.count = 3;
  ann.repetitions = {{0, 40}, {40, 90}, {100, 150}};
  const auto d = MakeDensityMap(ann, 12, 16.0);
  const auto r = ComputeLoss(d.values, d.values, 3);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_NEAR(r.mae, 0.0, 1e-6);
}

TEST(Loss, HandArithmetic) {
  const std::vector<float> d(4, 0.0f), pred(4, 0.5f);
  const auto r = ComputeLoss(d, pred, 0);
  EXPECT_DOUBLE_EQ(r.mse, 0.25);
  EXPECT_DOUBLE_EQ(r.mae, 2.0);
  EXPECT_DOUBLE_EQ(r.total, 2.25);
  // tape version agrees
  Tape tape;
  const auto l = DensityLoss(tape.Leaf(Tensor({4}, pred)), d, 0);
  EXPECT_FLOAT_EQ(l.mse.value().item(), 0.25f);
  EXPECT_FLOAT_EQ(l.mae.value().item(), 2.0f);
  EXPECT_FLOAT_EQ(l.total.value().item(), 2.25f);
}

TEST(Loss, MaeGradientIsSignOverCount) {
  for (double c : {0.0, 1.0, 5.0}) {
    for (double level : {0.1, 3.0}) {
      const std::vector<float> target(6, 0.0f);
      TensorD pred = TensorD::Full({6}, level);
      auto r = testing::CheckGradients<double>({pred}, [&](TapeD&, const std::vector<VarD>& v) {
        return DensityLoss(v[0], target, c).mae;
      });
      EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
      TapeD tape;
      auto p = tape.Leaf(pred);
      tape.Backward(DensityLoss(p, target, c).mae);
      const double sign = 6 * level > c ? 1.0 : -1.0;
      const auto grad = tape.grad(p);
      for (double g : grad.storage()) EXPECT_NEAR(g, sign / std::max(c, 1.0), 1e-12);
    }
  }
}

TEST(Loss, NonNegativeAndTotalIsSum) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<float> a(n), b(n);
    for (auto& x : a) x = std::uniform_real_distribution<float>(0, 1)(rng);
    for (auto& x : b) x = std::uniform_real_distribution<float>(0, 1)(rng);
    const auto r = ComputeLoss(a, b, static_cast<double>(rng() % 10));
    EXPECT_GE(r.mse, 0.0);
    EXPECT_GE(r.mae, 0.0);
    EXPECT_NEAR(r.total, r.mse + r.mae, 1e-6);
  }
  EXPECT_THROW(ComputeLoss(std::vector<float>(3), std::vector<float>(4), 1), ShapeError);
}

TEST(Schedule, DecaysEverySixtyEpochs) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(LearningRateAt(cfg, 0), 5e-5);
  EXPECT_DOUBLE_EQ(LearningRateAt(cfg, 59), 5e-5);
  EXPECT_DOUBLE_EQ(LearningRateAt(cfg, 60), 5e-5 * 0.8);
  EXPECT_DOUBLE_EQ(LearningRateAt(cfg, 120), 5e-5 * 0.8 * 0.8);
  EXPECT_DOUBLE_EQ(LearningRateAt(cfg, 299), 5e-5 * std::pow(0.8, 4));
}

TEST(TrainConfig, ReferenceDefaults) {
  TrainConfig cfg;
  EXPECT_EQ(cfg.epochs, 300u);
  EXPECT_EQ(cfg.accumulation, 8u);
  EXPECT_DOUBLE_EQ(cfg.weight_decay, 5e-2);
  EXPECT_DOUBLE_EQ(cfg.exemplars.p_cross_video, 0.4);
  EXPECT_EQ(cfg.exemplars.shot_set, (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(cfg.density.sigma, 0.5);
}

TEST(AdamW, WeightDecayIsDecoupled) {
  auto params = testing::LiveInit<float>(DecoderConfig::Desk(), 1);
  const auto before = params;
  AdamW opt({.weight_decay = 0.05}, params);
  std::vector<Tensor> zeros;
  for (const auto& v : params.values) zeros.emplace_back(v.shape());
  opt.Step(params, zeros, 1e-2);
  for (std::size_t k = 0; k < params.values.size(); ++k)
    for (std::size_t i = 0; i < params.values[k].size(); ++i)
      EXPECT_FLOAT_EQ(params.values[k][i], before.values[k][i] * (1 - 1e-2 * 0.05));
}

TEST(AdamW, FirstStepMovesBySignTimesLr) {
  auto params = testing::LiveInit<float>(DecoderConfig::Desk(), 2);
  const auto before = params;
  AdamW opt({.weight_decay = 0.0}, params);
  std::vector<Tensor> grads;
  for (const auto& v : params.values) grads.push_back(Tensor::Full(v.shape(), -0.3f));
  opt.Step(params, grads, 1e-3);
  EXPECT_NEAR(params.values[0][0], before.values[0][0] + 1e-3, 1e-7);
}

TEST(TimeShift, ZeroShiftIsIdentity) {
  const auto corpus = ToyCorpus(1, 10);
  const auto [seq, ann] = TimeShift(corpus[0].features, corpus[0].annotation, 0);
  EXPECT_EQ(seq.tokens, corpus[0].features.tokens);
  EXPECT_EQ(ann.repetitions, corpus[0].annotation.repetitions);
  // shifts below one token do nothing at token resolution
  EXPECT_EQ(TimeShift(corpus[0].features, corpus[0].annotation, 15).first.tokens, corpus[0].features.tokens);
}

TEST(TimeShift, OneTokenShiftMovesDensityOneBin) {
  const auto corpus = ToyCorpus(1, 11);
  const auto& item = corpus[0];
  auto [seq, ann] = TimeShift(item.features, item.annotation, 16);
  ASSERT_EQ(seq.grid.t, item.features.grid.t - 1);
  EXPECT_EQ(seq.raw_frames, item.features.raw_frames - 16);
  const auto before = MakeDensityMap(item.annotation, item.features.grid.t, 16.0);
  const auto after = MakeDensityMap(ann, seq.grid.t, seq.frames_per_token());
  ASSERT_EQ(ann.count, item.annotation.count);
  // interior repetitions: synthetic edges keep the first center well past one token
  for (std::size_t t = 0; t < after.size(); ++t) EXPECT_NEAR(after.values[t], before.values[t + 1], 1e-5);
  const std::size_t c = item.features.channels(), per_t = item.features.grid.spatial() * c;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) EXPECT_EQ(seq.tokens[i], item.features.tokens[per_t + i]);
}

TEST(TimeShift, CountPreservedWhenRepetitionsStayInside) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto item = ToyCorpus(1, 100 + s)[0];
    for (std::uint32_t eps = 0; eps < 64; eps += 7) {
      const auto [seq, ann] = TimeShift(item.features, item.annotation, eps);
      const auto offset = static_cast<std::int64_t>(eps / 16 * 16);
      std::uint32_t inside = 0;
      for (const auto& r : item.annotation.repetitions) inside += r.start >= offset;
      EXPECT_GE(ann.count, inside);
      EXPECT_EQ(ann.count, ann.repetitions.size());
      ann.Validate();
      const auto d = MakeDensityMap(ann, seq.grid.t, seq.frames_per_token());
      EXPECT_NEAR(d.Sum(), ann.count, 1e-5);
    }
  }
}

TEST(TimeShift, BoundaryCutRepetitionIsClipped) {
  FeatureSequence seq;
  seq.grid = {8, 1, 1};
  seq.tokens = Tensor({8, 2});
  seq.raw_frames = 128;
  RepetitionAnnotation ann;
  ann.count = 2;
  ann.repetitions = {{0, 20}, {20, 60}};  // centers 10 and 40
  const auto [s, a] = TimeShift(seq, ann, 32);
  ASSERT_EQ(a.count, 1u);
  EXPECT_EQ(a.repetitions[0], (FrameInterval{0, 28}));
}

std::vector<PreparedInstance> EightInstances() {
  const auto corpus = ToyCorpus(8, 20);
  std::vector<PreparedInstance> batch;
  for (const auto& item : corpus) {
    std::vector<ExemplarLatent> ex;
    if (batch.size() % 2) ex.push_back(ExtractExemplar(item.features, item.annotation.repetitions[0], 16));
    batch.push_back(PrepareInstance(item.features, item.annotation, ex, {}, PositionalEncodingMode::kFlattened));
  }
  return batch;
}

template <typename T>
std::vector<BasicTensor<T>> AccumulateSingletons(const BasicDecoderParams<T>& params,
                                                 const std::vector<PreparedInstance>& batch) {
  std::vector<BasicTensor<T>> acc;
  for (const auto& inst : batch) {
    const auto g = ComputeGradients(params, std::span<const PreparedInstance>(&inst, 1));
    if (acc.empty()) {
      acc = g.grads;
    } else {
      for (std::size_t k = 0; k < acc.size(); ++k)
        for (std::size_t i = 0; i < acc[k].size(); ++i) acc[k][i] += g.grads[k][i];
    }
  }
  for (auto& t : acc)
    for (T& x : t.storage()) x /= static_cast<T>(batch.size());
  return acc;
}

// One AdamW step in double precision on the given gradients.
BasicDecoderParams<double> AdamStep(BasicDecoderParams<double> p, const std::vector<TensorD>& grads, double lr) {
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 5e-2;
  for (std::size_t k = 0; k < p.values.size(); ++k)
    for (std::size_t i = 0; i < p.values[k].size(); ++i) {
      const double g = grads[k][i];
      const double m = (1 - b1) * g / (1 - b1), v = (1 - b2) * g * g / (1 - b2);
      p.values[k][i] -= lr * (wd * p.values[k][i] + m / (std::sqrt(v) + eps));
    }
  return p;
}

TEST(ComputeGradients, AccumulatingSingletonsEqualsOneBatch) {
  const auto batch = EightInstances();
  const auto params = testing::LiveInit<double>(DecoderConfig::Desk(), 3);
  const auto whole = ComputeGradients(params, batch);
  const auto acc = AccumulateSingletons(params, batch);
  const auto p1 = AdamStep(params, whole.grads, 1e-3);
  const auto p2 = AdamStep(params, acc, 1e-3);
  for (std::size_t k = 0; k < p1.values.size(); ++k)
    for (std::size_t i = 0; i < p1.values[k].size(); ++i) EXPECT_NEAR(p1.values[k][i], p2.values[k][i], 1e-5);
}

TEST(ComputeGradients, AccumulationMatchesInSinglePrecision) {
  const auto batch = EightInstances();
  const auto params = testing::LiveInit<float>(DecoderConfig::Desk(), 3);
  const auto whole = ComputeGradients(params, batch);
  const auto acc = AccumulateSingletons(params, batch);
  for (std::size_t k = 0; k < acc.size(); ++k) {
    double scale = 0, diff = 0;
    for (std::size_t i = 0; i < acc[k].size(); ++i) {
      scale = std::max(scale, std::abs(static_cast<double>(whole.grads[k][i])));
      diff = std::max(diff, std::abs(static_cast<double>(whole.grads[k][i]) - acc[k][i]));
    }
    EXPECT_LE(diff, 1e-5 * std::max(scale, 1.0)) << params.names[k];
  }
}

TEST(ComputeGradients, OverfitsSingleInstance) {
  const auto corpus = ToyCorpus(1, 30);
  auto params = DecoderParams::Init(DecoderConfig::Desk(), 4);
  const auto inst = PrepareInstance(corpus[0].features, corpus[0].annotation, {}, {}, PositionalEncodingMode::kFlattened);
  AdamW opt({}, params);
  std::vector<double> losses;
  for (int step = 0; step < 51; ++step) {
    const auto g = ComputeGradients(params, std::span<const PreparedInstance>(&inst, 1));
    losses.push_back(g.loss.total);
    opt.Step(params, g.grads, 1e-4);
  }
  int non_increasing = 0;
  for (int i = 1; i < 51; ++i) non_increasing += losses[i] <= losses[i - 1];
  EXPECT_GE(non_increasing, 45) << losses.front() << " -> " << losses.back();
  EXPECT_LT(losses.back(), 0.2 * losses.front());
}

TEST(Trainer, ZeroLearningRateLeavesParamsUnchanged) {
  const auto corpus = ToyCorpus(6, 40);
  const CorpusIndex index(corpus);
  TrainConfig cfg;
  cfg.lr = 0;
  const auto params = testing::LiveInit<float>(DecoderConfig::Desk(), 5);
  Trainer trainer(cfg, params);
  trainer.TrainEpoch(corpus, index);
  EXPECT_EQ(trainer.params().values, params.values);
}

TEST(Trainer, DeterministicUnderSeedAndLogsEveryStep) {
  const auto corpus = ToyCorpus(10, 50);
  const CorpusIndex index(corpus);
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.seed = 9;
  std::vector<StepRecord> log;
  Trainer a(cfg, testing::LiveInit<float>(DecoderConfig::Desk(), 6));
  a.SetStepCallback([&](const StepRecord& r) { log.push_back(r); });
  const auto ra = a.TrainEpoch(corpus, index);
  cfg.threads = 3;
  Trainer b(cfg, testing::LiveInit<float>(DecoderConfig::Desk(), 6));
  const auto rb = b.TrainEpoch(corpus, index);
  EXPECT_EQ(a.params().values, b.params().values);
  EXPECT_EQ(ra.loss.total, rb.loss.total);
  ASSERT_EQ(log.size(), 2u);  // 10 instances in groups of 8
  EXPECT_EQ(log[1].step, 2u);
  const auto parsed = StepRecordFromJson(StepRecordToJson(log[0]));
  EXPECT_EQ(parsed.step, log[0].step);
  EXPECT_EQ(parsed.mse, log[0].mse);
  EXPECT_EQ(parsed.lr, 1e-3);
}

TEST(Trainer, ResumeContinuesExactly) {
  const auto corpus = ToyCorpus(6, 60);
  const CorpusIndex index(corpus);
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.decay_every = 1;
  cfg.seed = 3;
  Trainer straight(cfg, testing::LiveInit<float>(DecoderConfig::Desk(), 7));
  straight.TrainEpoch(corpus, index);
  straight.TrainEpoch(corpus, index);

  Trainer first(cfg, testing::LiveInit<float>(DecoderConfig::Desk(), 7));
  first.TrainEpoch(corpus, index);
  const auto path = std::filesystem::temp_directory_path() / "escounts_resume_test.esck";
  first.Save(path);
  Trainer resumed(cfg, LoadCheckpoint(path));
  EXPECT_EQ(resumed.epoch(), 1u);
  const auto r = resumed.TrainEpoch(corpus, index);
  EXPECT_DOUBLE_EQ(r.lr, 1e-3 * 0.8);
  EXPECT_EQ(resumed.params().values, straight.params().values);
  std::filesystem::remove(path);
}

TEST(Trainer, NonFiniteValuesAbortWithInstanceId) {
  const auto corpus = ToyCorpus(2, 70);
  const CorpusIndex index(corpus);
  auto params = testing::LiveInit<float>(DecoderConfig::Desk(), 8);
  for (float& x : params.values[params.Find("head.w")].storage()) x = 3e38f;
  Trainer trainer(TrainConfig{}, params);
  try {
    trainer.TrainEpoch(corpus, index);
    FAIL() << "expected a training error";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("toy"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace escounts
