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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "escounts/decoder.hpp"
#include "escounts/exemplars.hpp"
#include "escounts/features.hpp"
#include "escounts/metrics.hpp"

namespace escounts {

struct CountPrediction {
  std::string video_id;
  DensityMap density;  // ensembled
  double raw_count = 0;
  std::int64_t rounded_count = 0;
  std::vector<DensityMap> per_shift;
  std::vector<std::size_t> offsets;  // token offset of each shift
};

struct InferenceConfig {
  std::uint32_t shifts = 4;
  std::uint32_t shots = 0;
  InferenceExemplarSource source = InferenceExemplarSource::kTestVideo;
  PositionalEncodingMode positional = PositionalEncodingMode::kFlattened;
  std::size_t threads = 1;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Token offsets floor(k fpw / K / frames_per_token), k = 0..K-1. Returns {0}
// (with a warning) when some shift would leave less than one window.
std::vector<std::size_t> ShiftOffsets(const FeatureSequence& seq, std::uint32_t shifts);

// Bin t of the result averages maps[k][t - offsets[k]] over the shifts that cover t.
DensityMap EnsembleShiftedMaps(std::span<const DensityMap> maps, std::span<const std::size_t> offsets,
                               std::size_t tokens);

// `seq` without positional encoding; it is added per shifted slice.
CountPrediction PredictCount(const DecoderParams& params, const FeatureSequence& seq,
                             std::span<const ExemplarLatent> exemplars, std::uint32_t shifts,
                             PositionalEncodingMode positional = PositionalEncodingMode::kFlattened);

struct Evaluation {
  std::vector<CountPrediction> predictions;  // corpus order
  std::vector<CountPair> pairs;
  MetricReport metrics;
};

// shots > 0 draws exemplars per video from an RNG seeded by (seed, index), so
// results do not depend on the thread count.
Evaluation EvaluateSplit(const DecoderParams& params, std::span<const CorpusItem> corpus,
                         const InferenceConfig& config, const CorpusIndex* donors = nullptr);

// One JSON object per line: {video_id, raw_count, rounded_count, frames_per_token, density}.
std::string PredictionToJsonLine(const CountPrediction& p);
CountPrediction PredictionFromJsonLine(const std::string& line);

}  // namespace escounts
