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

#include "escounts/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <random>

namespace escounts {
namespace {

std::string PaddedId(const std::string& split, std::uint32_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04u", i);
  return split + buf;
}

}  // namespace

std::filesystem::path FeaturePath(const std::filesystem::path& dir, const std::string& id) {
  return dir / "features" / (id + ".escf");
}

std::filesystem::path SidecarPath(const std::filesystem::path& dir, const std::string& id) {
  return dir / "annotations" / (id + ".json");
}

std::filesystem::path ManifestPath(const std::filesystem::path& dir, const std::string& split) {
  return dir / (split + ".txt");
}

void SaveItem(const std::filesystem::path& dir, const CorpusItem& item) {
  const auto& id = item.annotation.video_id;
  if (id.empty()) throw CorpusError("corpus item without a video id");
  std::filesystem::create_directories(dir / "features");
  std::filesystem::create_directories(dir / "annotations");
  SaveFeatures(item.features, FeaturePath(dir, id));
  SaveSidecar(item.annotation, SidecarPath(dir, id));
}

void WriteManifest(const std::filesystem::path& dir, const std::string& split, const std::vector<std::string>& ids) {
  std::filesystem::create_directories(dir);
  std::ofstream os(ManifestPath(dir, split));
  if (!os) throw CorpusError("cannot write manifest " + ManifestPath(dir, split).string());
  for (const auto& id : ids) os << id << '\n';
  if (!os) throw CorpusError("write failed for manifest " + split);
}

std::vector<std::string> ReadManifest(const std::filesystem::path& dir, const std::string& split) {
  std::ifstream is(ManifestPath(dir, split));
  if (!is) throw CorpusError("missing manifest " + ManifestPath(dir, split).string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(first, last - first + 1));
  }
  return ids;
}

std::vector<CorpusItem> LoadSplit(const std::filesystem::path& dir, const std::string& split) {
  std::vector<CorpusItem> out;
  for (const auto& id : ReadManifest(dir, split)) {
    CorpusItem item;
    try {
      item.features = LoadFeatures(FeaturePath(dir, id));
      item.annotation = LoadSidecar(SidecarPath(dir, id));
    } catch (const std::exception& e) {
      throw CorpusError("corrupt corpus entry " + id + ": " + e.what());
    }
    if (item.annotation.video_id != id) {
      throw CorpusError("sidecar of " + id + " names video " + item.annotation.video_id);
    }
    item.features.source_id = id;
    out.push_back(std::move(item));
  }
  return out;
}

void SynthCorpusSpec::Validate() const {
  if (classes == 0) throw std::invalid_argument("synth corpus: at least one class");
  if (n_train + n_test == 0) throw std::invalid_argument("synth corpus: no videos requested");
  video.Validate();
}

std::vector<CorpusItem> SynthCorpusSplit(const SynthCorpusSpec& spec, const std::string& split) {
  spec.Validate();
  if (split != "train" && split != "test") throw std::invalid_argument("synth corpus: unknown split " + split);
  const std::uint32_t n = split == "train" ? spec.n_train : spec.n_test;
  // separate stream per split
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(split == "train" ? 1 : 2)};
  std::mt19937_64 rng(seq);
  std::mt19937_64 motif_rng(spec.seed);
  std::vector<std::uint64_t> motif_seeds(spec.classes);
  for (auto& m : motif_seeds) m = motif_rng();
  std::vector<CorpusItem> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    SyntheticSpec v = spec.video;
    v.seed = rng();
    v.motif_seed = motif_seeds[i % spec.classes];
    v.class_label = "class" + std::to_string(i % spec.classes);
    v.video_id = PaddedId(split, i);
    auto [features, ann] = SynthSequence(v);
    out.push_back({std::move(features), std::move(ann)});
  }
  return out;
}

void WriteSynthCorpus(const SynthCorpusSpec& spec, const std::filesystem::path& dir) {
  for (const std::string split : {"train", "test"}) {
    std::vector<std::string> ids;
    for (const auto& item : SynthCorpusSplit(spec, split)) {
      SaveItem(dir, item);
      ids.push_back(item.annotation.video_id);
    }
    WriteManifest(dir, split, ids);
  }
}

}  // namespace escounts
