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

#include "escounts/inference.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "escounts/parallel.hpp"
#include "json.hpp"

namespace escounts {

void InferenceConfig::Validate() const {
  if (shifts == 0) throw std::invalid_argument("inference: at least one shift is required");
  if (threads == 0) throw std::invalid_argument("inference: threads must be positive");
}

std::vector<std::size_t> ShiftOffsets(const FeatureSequence& seq, std::uint32_t shifts) {
  if (shifts == 0) throw std::invalid_argument("inference: at least one shift is required");
  const double fpt = seq.frames_per_token();
  const double window_tokens = seq.frames_per_window / fpt;
  std::vector<std::size_t> offsets;
  for (std::uint32_t k = 0; k < shifts; ++k) {
    const double eps = static_cast<double>(k) * seq.frames_per_window / shifts;
    const auto s = static_cast<std::size_t>(std::floor(eps / fpt + 1e-9));
    if (static_cast<double>(seq.grid.t) - static_cast<double>(s) < window_tokens - 1e-9) {
      spdlog::warn("{}: too short for {} shifts, using a single pass", seq.source_id, shifts);
      return {0};
    }
    offsets.push_back(s);
  }
  return offsets;
}

DensityMap EnsembleShiftedMaps(std::span<const DensityMap> maps, std::span<const std::size_t> offsets,
                               std::size_t tokens) {
  if (maps.empty() || maps.size() != offsets.size()) throw std::invalid_argument("ensemble: one offset per map");
  std::vector<double> sum(tokens, 0.0);
  std::vector<std::size_t> cover(tokens, 0);
  for (std::size_t k = 0; k < maps.size(); ++k) {
    if (offsets[k] + maps[k].size() > tokens) throw std::invalid_argument("ensemble: shifted map exceeds the sequence");
    for (std::size_t j = 0; j < maps[k].size(); ++j) {
      sum[offsets[k] + j] += maps[k].values[j];
      ++cover[offsets[k] + j];
    }
  }
  DensityMap out;
  out.frames_per_token = maps[0].frames_per_token;
  out.values.resize(tokens);
  for (std::size_t t = 0; t < tokens; ++t) {
    if (cover[t] == 0) throw std::invalid_argument("ensemble: bin " + std::to_string(t) + " covered by no shift");
    out.values[t] = static_cast<float>(sum[t] / static_cast<double>(cover[t]));
  }
  return out;
}

CountPrediction PredictCount(const DecoderParams& params, const FeatureSequence& seq,
                             std::span<const ExemplarLatent> exemplars, std::uint32_t shifts,
                             PositionalEncodingMode positional) {
  seq.Validate();
  CountPrediction out;
  out.video_id = seq.source_id;
  out.offsets = ShiftOffsets(seq, shifts);
  for (std::size_t s : out.offsets) {
    const auto slice = s == 0 ? seq : seq.TemporalSlice(s, seq.grid.t - s);
    auto map = Predict(params, AddPositionalEncoding(slice, positional), exemplars);
    map.frames_per_token = seq.frames_per_token();
    out.per_shift.push_back(std::move(map));
  }
  out.density = EnsembleShiftedMaps(out.per_shift, out.offsets, seq.grid.t);
  out.raw_count = out.density.Sum();
  out.rounded_count = RoundCount(out.raw_count);
  return out;
}

Evaluation EvaluateSplit(const DecoderParams& params, std::span<const CorpusItem> corpus,
                         const InferenceConfig& config, const CorpusIndex* donors) {
  config.Validate();
  if (corpus.empty()) throw std::invalid_argument("evaluation: empty corpus");
  Evaluation ev;
  ev.predictions.resize(corpus.size());
  ParallelFor(corpus.size(), config.threads, [&](std::size_t i) {
    const auto& item = corpus[i];
    std::vector<ExemplarLatent> exemplars;
    if (config.shots > 0) {
      std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                        static_cast<std::uint32_t>(i)};
      std::mt19937_64 rng(seq);
      exemplars = ExemplarsForInference(config.shots, config.source, item, donors, params.config.exemplar_tokens, rng);
    }
    auto p = PredictCount(params, item.features, exemplars, config.shifts, config.positional);
    if (!item.annotation.video_id.empty()) p.video_id = item.annotation.video_id;
    ev.predictions[i] = std::move(p);
  });
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ev.pairs.push_back({static_cast<double>(corpus[i].annotation.count), ev.predictions[i].raw_count});
  }
  ev.metrics = ComputeMetrics(ev.pairs);
  return ev;
}

std::string PredictionToJsonLine(const CountPrediction& p) {
  nlohmann::ordered_json j;
  j["video_id"] = p.video_id;
  j["raw_count"] = p.raw_count;
  j["rounded_count"] = p.rounded_count;
  j["frames_per_token"] = p.density.frames_per_token;
  j["density"] = p.density.values;
  return j.dump();
}

CountPrediction PredictionFromJsonLine(const std::string& line) {
  CountPrediction p;
  try {
    const auto j = nlohmann::json::parse(line);
    p.video_id = j.at("video_id").get<std::string>();
    p.raw_count = j.at("raw_count").get<double>();
    p.rounded_count = j.at("rounded_count").get<std::int64_t>();
    p.density.frames_per_token = j.value("frames_per_token", 1.0);
    p.density.values = j.at("density").get<std::vector<float>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed prediction record: ") + e.what());
  }
  return p;
}

}  // namespace escounts
