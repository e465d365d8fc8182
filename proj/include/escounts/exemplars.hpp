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
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "escounts/annotations.hpp"
#include "escounts/features.hpp"

namespace escounts {

// One annotated video: raw encoder latents (no positional encoding) and labels.
struct CorpusItem {
  FeatureSequence features;
  RepetitionAnnotation annotation;
};

struct ExemplarPolicy {
  std::vector<std::uint32_t> shot_set{0, 1, 2};
  double p_cross_video = 0.4;
  // One cross-video draw shared by every exemplar of an instance.
  bool per_instance_decision = false;
  std::size_t exemplar_tokens = 16;

  void Validate() const;
};

struct TrainingInstance {
  std::size_t query = 0;  // index into the corpus
  std::vector<ExemplarLatent> exemplars;
  bool uses_z0 = true;
};

class ExemplarError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Class label -> corpus items with annotated repetitions. Holds a reference to
// the corpus, which must outlive it.
class CorpusIndex {
 public:
  explicit CorpusIndex(std::span<const CorpusItem> corpus);

  std::span<const CorpusItem> corpus() const { return corpus_; }
  const CorpusItem& item(std::size_t i) const { return corpus_[i]; }
  // Same-class items with repetitions other than the video `exclude_id`.
  std::vector<std::size_t> Donors(const std::string& class_label, const std::string& exclude_id) const;

 private:
  std::span<const CorpusItem> corpus_;
  std::map<std::string, std::vector<std::size_t>> by_class_;
};

TrainingInstance SampleExemplars(const ExemplarPolicy& policy, std::size_t query, const CorpusIndex& index,
                                 std::mt19937_64& rng);

enum class InferenceExemplarSource { kTestVideo, kTrainDonor };

// k = 0 returns an empty list (zero-shot). kTestVideo draws k distinct
// repetitions of the query; kTrainDonor draws each from a random same-class
// video of `donors`.
std::vector<ExemplarLatent> ExemplarsForInference(std::size_t k, InferenceExemplarSource source,
                                                  const CorpusItem& query, const CorpusIndex* donors,
                                                  std::size_t exemplar_tokens, std::mt19937_64& rng);

}  // namespace escounts
