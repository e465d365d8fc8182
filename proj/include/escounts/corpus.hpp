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
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "escounts/exemplars.hpp"
#include "escounts/features.hpp"

namespace escounts {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// On-disk layout:
//   <dir>/features/<id>.escf
//   <dir>/annotations/<id>.json
//   <dir>/<split>.txt        one id per line, '#' starts a comment
std::filesystem::path FeaturePath(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path SidecarPath(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path ManifestPath(const std::filesystem::path& dir, const std::string& split);

void SaveItem(const std::filesystem::path& dir, const CorpusItem& item);
void WriteManifest(const std::filesystem::path& dir, const std::string& split, const std::vector<std::string>& ids);
std::vector<std::string> ReadManifest(const std::filesystem::path& dir, const std::string& split);
// Loads every item of a split; the sidecar video_id must match the file name.
std::vector<CorpusItem> LoadSplit(const std::filesystem::path& dir, const std::string& split);

struct SynthCorpusSpec {
  SyntheticSpec video;  // per-video template; seed, motif_seed, label and id are overwritten
  std::uint32_t n_train = 200;
  std::uint32_t n_test = 50;
  std::uint32_t classes = 4;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Video i of a split gets class i % classes. Ids: train_0000, test_0000, ...
std::vector<CorpusItem> SynthCorpusSplit(const SynthCorpusSpec& spec, const std::string& split);
void WriteSynthCorpus(const SynthCorpusSpec& spec, const std::filesystem::path& dir);

}  // namespace escounts
