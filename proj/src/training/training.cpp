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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "escounts/parallel.hpp"
#include "json.hpp"

namespace escounts {

template <typename T>
LossVars<T> DensityLoss(BasicVar<T> pred, std::span<const float> target, double count) {
  if (pred.value().size() != target.size()) {
    throw ShapeError("loss: prediction has " + std::to_string(pred.value().size()) + " bins, target " +
                     std::to_string(target.size()));
  }
  if (count < 0) throw std::invalid_argument("loss: negative count");
  BasicTensor<T> t(pred.shape());
  for (std::size_t i = 0; i < target.size(); ++i) t[i] = static_cast<T>(target[i]);
  auto* tape = pred.tape;
  auto mse = Scale(Sum(Square(Sub(pred, tape->Constant(std::move(t))))), 1.0 / static_cast<double>(target.size()));
  auto mae = Scale(Abs(AddScalar(Sum(pred), -count)), 1.0 / std::max(count, 1.0));
  return {mse, mae, Add(mse, mae)};
}

template LossVars<float> DensityLoss<float>(BasicVar<float>, std::span<const float>, double);
template LossVars<double> DensityLoss<double>(BasicVar<double>, std::span<const float>, double);

LossReport ComputeLoss(std::span<const float> target, std::span<const float> pred, double count) {
  if (target.size() != pred.size()) throw ShapeError("loss: length mismatch");
  if (target.empty()) throw ShapeError("loss: empty density map");
  LossReport r;
  double sum = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(target[i]) - pred[i];
    r.mse += d * d;
    sum += pred[i];
  }
  r.mse /= static_cast<double>(pred.size());
  r.mae = std::abs(count - sum) / std::max(count, 1.0);
  r.total = r.mse + r.mae;
  return r;
}

AdamW::AdamW(const AdamWConfig& config, const DecoderParams& params) : config_(config) {
  for (const auto& v : params.values) {
    m_.emplace_back(v.shape());
    v_.emplace_back(v.shape());
  }
}

void AdamW::Step(DecoderParams& params, const std::vector<Tensor>& grads, double lr) {
  if (grads.size() != params.values.size() || m_.size() != params.values.size()) {
    throw std::invalid_argument("optimizer: gradient count does not match parameters");
  }
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.values.size(); ++k) {
    auto& p = params.values[k];
    const auto& g = grads[k];
    if (g.shape() != p.shape()) throw ShapeError("optimizer: gradient shape mismatch for " + params.names[k]);
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = b1 * m[i] + (1 - b1) * gi;
      const double vi = b2 * v[i] + (1 - b2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double update = config_.weight_decay * p[i] + (mi / c1) / (std::sqrt(vi / c2) + config_.eps);
      p[i] = static_cast<float>(p[i] - lr * update);
    }
  }
}

TrainingState AdamW::ExportState() const {
  TrainingState s;
  s.step = step_;
  s.m = m_;
  s.v = v_;
  return s;
}

void AdamW::ImportState(const TrainingState& state) {
  if (state.m.size() != m_.size() || state.v.size() != v_.size()) {
    throw std::invalid_argument("optimizer state does not match parameters");
  }
  step_ = state.step;
  m_ = state.m;
  v_ = state.v;
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("train config: " + msg); };
  if (!(lr >= 0)) fail("lr must be non-negative");
  if (!(lr_decay > 0 && lr_decay <= 1)) fail("lr decay must lie in (0, 1]");
  if (decay_every == 0) fail("decay interval must be positive");
  if (accumulation == 0) fail("accumulation steps must be positive");
  if (!(weight_decay >= 0)) fail("weight decay must be non-negative");
  if (threads == 0) fail("threads must be positive");
  exemplars.Validate();
}

double LearningRateAt(const TrainConfig& config, std::uint32_t epoch) {
  return config.lr * std::pow(config.lr_decay, static_cast<double>(epoch / config.decay_every));
}

double LearningRateAt(const TrainConfig& config, std::uint32_t epoch, std::uint64_t step) {
  const double lr = LearningRateAt(config, epoch);
  if (config.warmup_steps == 0 || step >= config.warmup_steps) return lr;
  return lr * static_cast<double>(step + 1) / config.warmup_steps;
}

std::pair<FeatureSequence, RepetitionAnnotation> TimeShift(const FeatureSequence& seq,
                                                           const RepetitionAnnotation& ann,
                                                           std::uint32_t shift_frames) {
  const double fpt = seq.frames_per_token();
  const auto k = static_cast<std::uint32_t>(std::floor(shift_frames / fpt));
  if (k == 0) return {seq, ann};
  if (k >= seq.grid.t) throw std::invalid_argument("time shift removes the whole sequence");
  auto out = seq.TemporalSlice(k, seq.grid.t - k);
  const auto offset = static_cast<std::int64_t>(std::llround(k * fpt));
  out.raw_frames = seq.raw_frames - static_cast<std::uint32_t>(offset);
  RepetitionAnnotation shifted = ann;
  shifted.repetitions.clear();
  const auto end = static_cast<std::int64_t>(out.raw_frames);
  for (const auto& r : ann.repetitions) {
    if (r.center() < static_cast<double>(offset) || r.center() >= static_cast<double>(seq.raw_frames)) continue;
    FrameInterval moved{std::max<std::int64_t>(r.start - offset, 0), std::min(r.end - offset, end)};
    if (moved.start < moved.end) shifted.repetitions.push_back(moved);
  }
  shifted.count = static_cast<std::uint32_t>(shifted.repetitions.size());
  if (ann.repetitions.empty()) shifted.count = ann.count;
  return {std::move(out), std::move(shifted)};
}

double MeanTargetDensity(std::span<const CorpusItem> corpus) {
  double count = 0, tokens = 0;
  for (const auto& item : corpus) {
    count += item.annotation.count;
    tokens += item.features.grid.t;
  }
  if (tokens == 0) throw std::invalid_argument("mean density of an empty corpus");
  return count / tokens;
}

PreparedInstance PrepareInstance(const FeatureSequence& seq, const RepetitionAnnotation& ann,
                                 std::vector<ExemplarLatent> exemplars, const DensityConfig& density,
                                 PositionalEncodingMode positional) {
  PreparedInstance p;
  p.id = ann.video_id.empty() ? seq.source_id : ann.video_id;
  const auto resolved = ResolvePseudoLabels(ann, seq.raw_frames);
  p.target = MakeDensityMap(resolved, seq.grid.t, seq.frames_per_token(), density).values;
  p.count = resolved.count;
  p.query = AddPositionalEncoding(seq, positional);
  for (auto& e : exemplars) p.exemplars.push_back(std::move(e.tokens));
  return p;
}

template <typename T>
BasicGradientResult<T> ComputeGradients(const BasicDecoderParams<T>& params, std::span<const PreparedInstance> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  BasicTape<T> tape;
  const auto w = BindDecoder(tape, params, true);
  std::vector<BasicVar<T>> totals;
  BasicGradientResult<T> out;
  for (const auto& inst : batch) {
    std::vector<BasicVar<T>> ex;
    for (const auto& e : inst.exemplars) ex.push_back(tape.Constant(e.template Cast<T>()));
    auto d = DecoderForward(w, params.config, tape.Constant(inst.query.tokens.template Cast<T>()), inst.query.grid,
                            std::span<const BasicVar<T>>(ex));
    auto l = DensityLoss(d, inst.target, inst.count);
    out.loss.mse += l.mse.value().item();
    out.loss.mae += l.mae.value().item();
    totals.push_back(l.total);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  auto loss = totals[0];
  for (std::size_t i = 1; i < totals.size(); ++i) loss = Add(loss, totals[i]);
  if (totals.size() > 1) loss = Scale(loss, inv);
  tape.Backward(loss);
  out.loss.mse *= inv;
  out.loss.mae *= inv;
  out.loss.total = out.loss.mse + out.loss.mae;
  for (const auto& leaf : w.leaves) out.grads.push_back(tape.grad(leaf));
  return out;
}

template BasicGradientResult<float> ComputeGradients<float>(const BasicDecoderParams<float>&,
                                                            std::span<const PreparedInstance>);
template BasicGradientResult<double> ComputeGradients<double>(const BasicDecoderParams<double>&,
                                                              std::span<const PreparedInstance>);

std::string StepRecordToJson(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["step"] = r.step;
  j["mse"] = r.mse;
  j["mae"] = r.mae;
  j["lr"] = r.lr;
  return j.dump();
}

StepRecord StepRecordFromJson(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  StepRecord r;
  r.epoch = j.at("epoch").get<std::uint32_t>();
  r.step = j.at("step").get<std::uint64_t>();
  r.mse = j.at("mse").get<double>();
  r.mae = j.at("mae").get<double>();
  r.lr = j.at("lr").get<double>();
  return r;
}

Trainer::Trainer(TrainConfig config, DecoderParams params)
    : config_(std::move(config)), params_(std::move(params)), rng_(config_.seed) {
  config_.Validate();
  optimizer_ = AdamW({.weight_decay = config_.weight_decay}, params_);
}

Trainer::Trainer(TrainConfig config, Checkpoint checkpoint) : Trainer(std::move(config), std::move(checkpoint.params)) {
  if (!checkpoint.state) return;
  optimizer_.ImportState(*checkpoint.state);
  epoch_ = checkpoint.state->epoch;
  std::istringstream is(checkpoint.state->rng_state);
  is >> rng_;
  if (!is) throw std::invalid_argument("checkpoint holds an unreadable RNG state");
}

void Trainer::Save(const std::filesystem::path& path) const {
  auto state = optimizer_.ExportState();
  state.epoch = epoch_;
  std::ostringstream os;
  os << rng_;
  state.rng_state = os.str();
  SaveCheckpoint(path, params_, &state);
}

EpochReport Trainer::TrainEpoch(std::span<const CorpusItem> corpus, const CorpusIndex& index) {
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  if (index.corpus().data() != corpus.data()) throw std::invalid_argument("corpus index built over another corpus");
  const double lr = LearningRateAt(config_, epoch_);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);

  EpochReport report;
  report.epoch = epoch_;
  report.lr = lr;
  for (std::size_t start = 0; start < order.size(); start += config_.accumulation) {
    const std::size_t n = std::min<std::size_t>(config_.accumulation, order.size() - start);
    std::vector<PreparedInstance> group;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& item = corpus[order[start + i]];
      std::uint32_t shift = 0;
      if (config_.time_shift && item.features.frames_per_window > 0) {
        shift = std::uniform_int_distribution<std::uint32_t>(0, item.features.frames_per_window - 1)(rng_);
      }
      const auto resolved = ResolvePseudoLabels(item.annotation, item.features.raw_frames);
      const auto [seq, ann] = TimeShift(item.features, resolved, shift);
      auto inst = SampleExemplars(config_.exemplars, order[start + i], index, rng_);
      group.push_back(PrepareInstance(seq, ann, std::move(inst.exemplars), config_.density, config_.positional));
    }
    std::vector<GradientResult> results(n);
    ParallelFor(n, config_.threads, [&](std::size_t i) {
      try {
        results[i] = ComputeGradients(params_, std::span<const PreparedInstance>(&group[i], 1));
      } catch (const NumericError& e) {
        throw TrainingError("non-finite value in epoch " + std::to_string(epoch_) + " on instance " + group[i].id +
                            ": " + e.what());
      }
    });
    std::vector<Tensor> grads = std::move(results[0].grads);
    LossReport step_loss = results[0].loss;
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t k = 0; k < grads.size(); ++k) {
        auto& acc = grads[k].storage();
        const auto& g = results[i].grads[k].storage();
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
      }
      step_loss.mse += results[i].loss.mse;
      step_loss.mae += results[i].loss.mae;
    }
    const float inv = 1.0f / static_cast<float>(n);
    for (auto& g : grads)
      for (float& x : g.storage()) x *= inv;
    const double step_lr = LearningRateAt(config_, epoch_, optimizer_.steps());
    optimizer_.Step(params_, grads, step_lr);
    if (!params_.AllFinite()) {
      throw TrainingError("parameters became non-finite at epoch " + std::to_string(epoch_) + ", last instance " +
                          group.back().id);
    }
    report.loss.mse += step_loss.mse;
    report.loss.mae += step_loss.mae;
    ++report.steps;
    if (on_step_) on_step_({epoch_, optimizer_.steps(), step_loss.mse / n, step_loss.mae / n, step_lr});
  }
  report.loss.mse /= static_cast<double>(corpus.size());
  report.loss.mae /= static_cast<double>(corpus.size());
  report.loss.total = report.loss.mse + report.loss.mae;
  ++epoch_;
  return report;
}

}  // namespace escounts
