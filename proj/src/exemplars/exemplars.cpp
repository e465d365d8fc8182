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

#include "escounts/exemplars.hpp"

#include <algorithm>
#include <numeric>

#include "spdlog/spdlog.h"

namespace escounts {

void ExemplarPolicy::Validate() const {
  if (shot_set.empty()) throw ExemplarError("shot set is empty");
  if (!(p_cross_video >= 0.0 && p_cross_video <= 1.0)) throw ExemplarError("p must lie in [0, 1]");
  if (exemplar_tokens == 0) throw ExemplarError("exemplar token budget must be positive");
}

CorpusIndex::CorpusIndex(std::span<const CorpusItem> corpus) : corpus_(corpus) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].annotation.repetitions.empty()) by_class_[corpus[i].annotation.class_label].push_back(i);
  }
  for (const auto& [label, items] : by_class_) {
    if (items.size() < 2) {
      spdlog::warn("class '{}' has a single annotated video; cross-video exemplars fall back to the query", label);
    }
  }
}

std::vector<std::size_t> CorpusIndex::Donors(const std::string& class_label, const std::string& exclude_id) const {
  std::vector<std::size_t> out;
  const auto it = by_class_.find(class_label);
  if (it == by_class_.end()) return out;
  for (std::size_t i : it->second) {
    if (corpus_[i].annotation.video_id != exclude_id) out.push_back(i);
  }
  return out;
}

namespace {

std::size_t UniformIndex(std::size_t n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

ExemplarLatent FromRepetition(const CorpusItem& item, std::size_t rep, ExemplarOrigin origin,
                              std::size_t exemplar_tokens) {
  auto ex = ExtractExemplar(item.features, item.annotation.repetitions.at(rep), exemplar_tokens);
  ex.origin = origin;
  ex.source_id = item.annotation.video_id;
  ex.class_label = item.annotation.class_label;
  return ex;
}

}  // namespace

TrainingInstance SampleExemplars(const ExemplarPolicy& policy, std::size_t query, const CorpusIndex& index,
                                 std::mt19937_64& rng) {
  policy.Validate();
  const CorpusItem& q = index.item(query);
  TrainingInstance inst;
  inst.query = query;
  const std::uint32_t shots = policy.shot_set[UniformIndex(policy.shot_set.size(), rng)];
  if (shots == 0) return inst;

  const auto donors = index.Donors(q.annotation.class_label, q.annotation.video_id);
  const bool has_own = !q.annotation.repetitions.empty();
  if (!has_own && donors.empty()) {
    throw ExemplarError(q.annotation.video_id + ": exemplars requested but no repetitions or same-class donors");
  }
  std::bernoulli_distribution cross(policy.p_cross_video);
  const bool shared_draw = cross(rng);
  for (std::uint32_t s = 0; s < shots; ++s) {
    bool from_other = policy.per_instance_decision ? shared_draw : (s == 0 ? shared_draw : cross(rng));
    if (from_other && donors.empty()) from_other = false;
    if (!from_other && !has_own) from_other = true;
    const CorpusItem& src = from_other ? index.item(donors[UniformIndex(donors.size(), rng)]) : q;
    const std::size_t rep = UniformIndex(src.annotation.repetitions.size(), rng);
    inst.exemplars.push_back(FromRepetition(src, rep,
                                            from_other ? ExemplarOrigin::kOtherVideo : ExemplarOrigin::kSameVideo,
                                            policy.exemplar_tokens));
  }
  inst.uses_z0 = false;
  return inst;
}

std::vector<ExemplarLatent> ExemplarsForInference(std::size_t k, InferenceExemplarSource source,
                                                  const CorpusItem& query, const CorpusIndex* donors,
                                                  std::size_t exemplar_tokens, std::mt19937_64& rng) {
  std::vector<ExemplarLatent> out;
  if (k == 0) return out;
  if (source == InferenceExemplarSource::kTestVideo) {
    const std::size_t n = query.annotation.repetitions.size();
    if (n < k) {
      throw ExemplarError(query.annotation.video_id + ": " + std::to_string(k) + " exemplars requested, " +
                          std::to_string(n) + " repetitions annotated");
    }
    std::vector<std::size_t> reps(n);
    std::iota(reps.begin(), reps.end(), 0);
    // partial Fisher-Yates: first k entries are a uniform k-subset
    for (std::size_t i = 0; i < k; ++i) std::swap(reps[i], reps[i + UniformIndex(n - i, rng)]);
    std::sort(reps.begin(), reps.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t i = 0; i < k; ++i) {
      out.push_back(FromRepetition(query, reps[i], ExemplarOrigin::kSameVideo, exemplar_tokens));
    }
    return out;
  }
  if (donors == nullptr) throw ExemplarError("donor exemplars need a training corpus");
  const auto pool = donors->Donors(query.annotation.class_label, query.annotation.video_id);
  if (pool.empty()) throw ExemplarError(query.annotation.video_id + ": no same-class donor video");
  for (std::size_t i = 0; i < k; ++i) {
    const CorpusItem& src = donors->item(pool[UniformIndex(pool.size(), rng)]);
    out.push_back(FromRepetition(src, UniformIndex(src.annotation.repetitions.size(), rng),
                                 ExemplarOrigin::kOtherVideo, exemplar_tokens));
  }
  return out;
}

}  // namespace escounts
