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

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "escounts/annotations.hpp"
#include "escounts/decoder.hpp"
#include "escounts/exemplars.hpp"
#include "escounts/features.hpp"

namespace escounts {

struct LossReport {
  double mse = 0;
  double mae = 0;
  double total = 0;
};

template <typename T>
struct LossVars {
  BasicVar<T> mse, mae, total;
};

// MSE = |d - pred|^2 / T', MAE = |c - sum(pred)| / max(c, 1), total = MSE + MAE.
template <typename T>
LossVars<T> DensityLoss(BasicVar<T> pred, std::span<const float> target, double count);
LossReport ComputeLoss(std::span<const float> target, std::span<const float> pred, double count);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-2;
};

// Adaptive moments with decoupled weight decay applied to every parameter.
class AdamW {
 public:
  AdamW() = default;
  AdamW(const AdamWConfig& config, const DecoderParams& params);

  void Step(DecoderParams& params, const std::vector<Tensor>& grads, double lr);
  std::uint64_t steps() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  TrainingState ExportState() const;
  void ImportState(const TrainingState& state);

 private:
  AdamWConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> m_, v_;
};

struct TrainConfig {
  std::uint32_t epochs = 300;
  double lr = 5e-5;
  double lr_decay = 0.8;
  std::uint32_t decay_every = 60;
  // Linear ramp over the first optimizer steps; 0 disables it.
  std::uint32_t warmup_steps = 0;
  double weight_decay = 5e-2;
  std::uint32_t accumulation = 8;
  ExemplarPolicy exemplars;
  DensityConfig density;
  bool time_shift = true;
  PositionalEncodingMode positional = PositionalEncodingMode::kFlattened;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void Validate() const;
};

// lr * decay^floor(epoch / decay_every), epochs counted from 0.
double LearningRateAt(const TrainConfig& config, std::uint32_t epoch);
// Epoch rate times min(1, (step + 1) / warmup_steps) for 0-based optimizer step.
double LearningRateAt(const TrainConfig& config, std::uint32_t epoch, std::uint64_t step);

// Drops the first floor(shift / frames_per_token) temporal tokens. Intervals move
// with the tokens and are clipped to the retained span; a repetition is kept when
// its center is still inside it.
std::pair<FeatureSequence, RepetitionAnnotation> TimeShift(const FeatureSequence& seq,
                                                           const RepetitionAnnotation& ann,
                                                           std::uint32_t shift_frames);

// Total count over total temporal tokens; input for SetHeadPrior.
double MeanTargetDensity(std::span<const CorpusItem> corpus);

// One forward/backward input: positional-encoded query, target map, exemplars.
struct PreparedInstance {
  std::string id;
  FeatureSequence query;
  std::vector<float> target;
  double count = 0;
  std::vector<Tensor> exemplars;  // empty: learned latent
};

PreparedInstance PrepareInstance(const FeatureSequence& seq, const RepetitionAnnotation& ann,
                                 std::vector<ExemplarLatent> exemplars, const DensityConfig& density,
                                 PositionalEncodingMode positional);

template <typename T>
struct BasicGradientResult {
  std::vector<BasicTensor<T>> grads;  // parameter order
  LossReport loss;
};
using GradientResult = BasicGradientResult<float>;

// Gradients of the mean loss over `batch` built on a single tape.
template <typename T>
BasicGradientResult<T> ComputeGradients(const BasicDecoderParams<T>& params, std::span<const PreparedInstance> batch);

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepRecord {
  std::uint32_t epoch = 0;
  std::uint64_t step = 0;
  double mse = 0;
  double mae = 0;
  double lr = 0;
};
std::string StepRecordToJson(const StepRecord& r);
StepRecord StepRecordFromJson(const std::string& line);

struct EpochReport {
  std::uint32_t epoch = 0;
  LossReport loss;  // mean over instances
  double lr = 0;
  std::uint64_t steps = 0;
};

class Trainer {
 public:
  Trainer(TrainConfig config, DecoderParams params);
  // Resumes params, optimizer moments, epoch and RNG.
  Trainer(TrainConfig config, Checkpoint checkpoint);

  EpochReport TrainEpoch(std::span<const CorpusItem> corpus, const CorpusIndex& index);
  const DecoderParams& params() const { return params_; }
  std::uint32_t epoch() const { return epoch_; }
  const TrainConfig& config() const { return config_; }
  void SetStepCallback(std::function<void(const StepRecord&)> cb) { on_step_ = std::move(cb); }
  void Save(const std::filesystem::path& path) const;

 private:
  TrainConfig config_;
  DecoderParams params_;
  AdamW optimizer_;
  std::mt19937_64 rng_;
  std::uint32_t epoch_ = 0;
  std::function<void(const StepRecord&)> on_step_;
};

}  // namespace escounts
