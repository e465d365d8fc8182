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

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "escounts/annotations.hpp"
#include "escounts/features.hpp"
#include "escounts/numerics/ops.hpp"
#include "escounts/numerics/tape.hpp"

namespace escounts {

enum class HeadAggregation : std::uint32_t { kSum = 0, kMean = 1 };
enum class HeadActivation : std::uint32_t { kSoftplus = 0, kLinear = 1 };

struct DecoderConfig {
  std::uint32_t ca_blocks = 2;
  std::uint32_t wsa_blocks = 3;
  std::uint32_t channels = 64;
  std::uint32_t heads = 4;
  std::uint32_t exemplar_tokens = 16;
  std::uint32_t mlp_ratio = 4;
  // Token grid of one encoder window.
  TokenGrid window_grid{4, 2, 2};
  // Self-attention window (t', h', w').
  std::array<std::uint32_t, 3> window{2, 2, 2};
  HeadAggregation aggregation = HeadAggregation::kSum;
  HeadActivation activation = HeadActivation::kSoftplus;

  static DecoderConfig Desk() { return {}; }
  static DecoderConfig FullScale();
  // Throws std::invalid_argument.
  void Validate() const;
  bool operator==(const DecoderConfig&) const = default;
};

// Windowed attention groups over a (T, H, W) token grid. Windows larger than an
// axis are clamped to it (and not shifted). Shifted layouts roll by half a
// window and keep wrapped regions apart; padding tokens are left out.
std::shared_ptr<const AttentionLayout> WindowLayout(const TokenGrid& grid, std::array<std::uint32_t, 3> window,
                                                    bool shifted);

struct ParamSpec {
  enum class Init { kXavier, kZeros, kOnes, kLatent };
  std::string name;
  Shape shape;
  Init init;
};

// Names, shapes and initializers in storage order.
std::vector<ParamSpec> DecoderLayout(const DecoderConfig& config);

template <typename T>
struct BasicDecoderParams {
  DecoderConfig config;
  std::vector<std::string> names;
  std::vector<BasicTensor<T>> values;

  static BasicDecoderParams Init(const DecoderConfig& config, std::uint64_t seed);
  std::size_t Find(const std::string& name) const;
  std::size_t NumScalars() const;
  bool AllFinite() const;

  template <typename U>
  BasicDecoderParams<U> Cast() const {
    BasicDecoderParams<U> out;
    out.config = config;
    out.names = names;
    for (const auto& v : values) out.values.push_back(v.template Cast<U>());
    return out;
  }
};
using DecoderParams = BasicDecoderParams<float>;

// Sets the head bias so an untrained model predicts `mean_density` per bin.
void SetHeadPrior(DecoderParams& params, double mean_density);

template <typename T>
struct AttentionWeights {
  BasicVar<T> wq, bq, wk, bk, wv, bv, wo, bo;
};
template <typename T>
struct MlpWeights {
  BasicVar<T> w1, b1, w2, b2;
};
template <typename T>
struct CaBlockWeights {
  BasicVar<T> ln1_gain, ln1_bias;
  AttentionWeights<T> self_attn;
  BasicVar<T> ln2_gain, ln2_bias;
  AttentionWeights<T> cross_attn;
  BasicVar<T> ln3_gain, ln3_bias;
  MlpWeights<T> mlp;
};
template <typename T>
struct WsaBlockWeights {
  BasicVar<T> ln1_gain, ln1_bias;
  AttentionWeights<T> attn;
  BasicVar<T> ln2_gain, ln2_bias;
  MlpWeights<T> mlp;
};
template <typename T>
struct DecoderWeights {
  std::vector<BasicVar<T>> leaves;  // same order as the params
  std::vector<CaBlockWeights<T>> ca;
  std::vector<WsaBlockWeights<T>> wsa;
  BasicVar<T> head_w, head_b;
  BasicVar<T> z0;
};

template <typename T>
DecoderWeights<T> BindDecoder(BasicTape<T>& tape, const BasicDecoderParams<T>& params, bool requires_grad);
// Same, over leaves already on a tape (in layout order).
template <typename T>
DecoderWeights<T> AssembleDecoder(const DecoderConfig& config, std::vector<BasicVar<T>> leaves);

// z' = SA(LN z) + z; z'' = mean_s CA(LN z', z_s) + z'; out = MLP(LN z'') + z''.
template <typename T>
BasicVar<T> CaBlock(const CaBlockWeights<T>& w, BasicVar<T> z, std::span<const BasicVar<T>> exemplars,
                    std::size_t heads);

// Windowed self-attention block over grid (T', H', W').
template <typename T>
BasicVar<T> WsaBlock(const WsaBlockWeights<T>& w, BasicVar<T> z, const TokenGrid& grid,
                     std::array<std::uint32_t, 3> window, bool shifted, std::size_t heads);

// Per-token linear C -> 1 and activation, then aggregation over H' W'. Returns [T'].
template <typename T>
BasicVar<T> DensityHead(BasicVar<T> w, BasicVar<T> b, BasicVar<T> z, const TokenGrid& grid,
                        HeadAggregation aggregation, HeadActivation activation);

// Full decoder. Empty exemplars select the learned latent z0.
template <typename T>
BasicVar<T> DecoderForward(const DecoderWeights<T>& w, const DecoderConfig& config, BasicVar<T> video,
                           const TokenGrid& grid, std::span<const BasicVar<T>> exemplars);

// Gradient-free forward on a positional-encoded sequence.
DensityMap Predict(const DecoderParams& params, const FeatureSequence& seq, std::span<const ExemplarLatent> exemplars);

// Optimizer moments and progress saved alongside the weights for resuming.
struct TrainingState {
  std::uint32_t epoch = 0;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::string rng_state;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const std::filesystem::path& path, const DecoderParams& params,
                    const TrainingState* state = nullptr);
struct Checkpoint {
  DecoderParams params;
  std::optional<TrainingState> state;
};
Checkpoint LoadCheckpoint(const std::filesystem::path& path);
// Also rejects a checkpoint whose config differs from `expected`.
Checkpoint LoadCheckpoint(const std::filesystem::path& path, const DecoderConfig& expected);

}  // namespace escounts
