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

#include "escounts/decoder.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace escounts {

DecoderConfig DecoderConfig::FullScale() {
  DecoderConfig c;
  c.channels = 512;
  c.heads = 8;
  c.window_grid = {8, 14, 14};
  c.exemplar_tokens = 8 * 14 * 14;
  c.window = {4, 7, 7};
  return c;
}

void DecoderConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("decoder config: " + msg); };
  if (channels == 0 || channels % 2 != 0) fail("channels must be positive and even");
  if (heads == 0 || channels % heads != 0) fail("channels not divisible by heads");
  if (mlp_ratio == 0) fail("mlp ratio must be positive");
  if (window_grid.tokens() == 0) fail("empty window grid");
  if (exemplar_tokens == 0 || exemplar_tokens % window_grid.spatial() != 0) {
    fail("exemplar tokens must be a positive multiple of H' W'");
  }
  const std::array<std::uint32_t, 3> dims{window_grid.t, window_grid.h, window_grid.w};
  for (int a = 0; a < 3; ++a) {
    if (window[a] == 0 || window[a] > dims[a]) fail("window must lie within the per-window token grid");
  }
}

std::shared_ptr<const AttentionLayout> WindowLayout(const TokenGrid& grid, std::array<std::uint32_t, 3> window,
                                                    bool shifted) {
  const std::array<std::uint32_t, 3> dims{grid.t, grid.h, grid.w};
  std::array<std::uint32_t, 3> size{}, shift{}, padded{};
  for (int a = 0; a < 3; ++a) {
    if (window[a] == 0) throw std::invalid_argument("window sizes must be positive");
    size[a] = std::min(window[a], dims[a]);
    shift[a] = (shifted && size[a] < dims[a]) ? size[a] / 2 : 0;
    padded[a] = (dims[a] + size[a] - 1) / size[a] * size[a];
  }
  using Key = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, int, int, int>;
  std::map<Key, std::vector<std::uint32_t>> groups;
  std::uint32_t index = 0;
  for (std::uint32_t t = 0; t < dims[0]; ++t) {
    for (std::uint32_t h = 0; h < dims[1]; ++h) {
      for (std::uint32_t w = 0; w < dims[2]; ++w, ++index) {
        const std::array<std::uint32_t, 3> x{t, h, w};
        std::array<std::uint32_t, 3> win{};
        std::array<int, 3> region{};
        for (int a = 0; a < 3; ++a) {
          // coordinate after rolling the padded grid back by the shift
          const std::uint32_t r = (x[a] + padded[a] - shift[a]) % padded[a];
          win[a] = r / size[a];
          region[a] = r < padded[a] - size[a] ? 0 : (r < padded[a] - shift[a] ? 1 : 2);
        }
        groups[{win[0], win[1], win[2], region[0], region[1], region[2]}].push_back(index);
      }
    }
  }
  auto layout = std::make_shared<AttentionLayout>();
  layout->groups.reserve(groups.size());
  for (auto& [key, rows] : groups) layout->groups.push_back({rows, rows});
  return layout;
}

std::vector<ParamSpec> DecoderLayout(const DecoderConfig& config) {
  config.Validate();
  using Init = ParamSpec::Init;
  const std::size_t c = config.channels, hidden = std::size_t{config.channels} * config.mlp_ratio;
  std::vector<ParamSpec> out;
  auto ln = [&](const std::string& p) {
    out.push_back({p + ".gain", {c}, Init::kOnes});
    out.push_back({p + ".bias", {c}, Init::kZeros});
  };
  auto attn = [&](const std::string& p) {
    for (const char* m : {"q", "k", "v", "o"}) {
      out.push_back({p + ".w" + m, {c, c}, Init::kXavier});
      out.push_back({p + ".b" + m, {c}, Init::kZeros});
    }
  };
  auto mlp = [&](const std::string& p) {
    out.push_back({p + ".w1", {c, hidden}, Init::kXavier});
    out.push_back({p + ".b1", {hidden}, Init::kZeros});
    out.push_back({p + ".w2", {hidden, c}, Init::kXavier});
    out.push_back({p + ".b2", {c}, Init::kZeros});
  };
  for (std::uint32_t i = 0; i < config.ca_blocks; ++i) {
    const std::string p = "ca" + std::to_string(i);
    ln(p + ".ln1");
    attn(p + ".sa");
    ln(p + ".ln2");
    attn(p + ".ca");
    ln(p + ".ln3");
    mlp(p + ".mlp");
  }
  for (std::uint32_t i = 0; i < config.wsa_blocks; ++i) {
    const std::string p = "wsa" + std::to_string(i);
    ln(p + ".ln1");
    attn(p + ".attn");
    ln(p + ".ln2");
    mlp(p + ".mlp");
  }
  out.push_back({"head.w", {c, 1}, Init::kZeros});
  out.push_back({"head.b", {1}, Init::kZeros});
  out.push_back({"z0", {config.exemplar_tokens, c}, Init::kLatent});
  return out;
}

template <typename T>
BasicDecoderParams<T> BasicDecoderParams<T>::Init(const DecoderConfig& config, std::uint64_t seed) {
  BasicDecoderParams p;
  p.config = config;
  std::mt19937_64 rng(seed);
  for (const auto& spec : DecoderLayout(config)) {
    p.names.push_back(spec.name);
    switch (spec.init) {
      case ParamSpec::Init::kXavier: {
        const double limit = std::sqrt(6.0 / static_cast<double>(spec.shape[0] + spec.shape[1]));
        p.values.push_back(BasicTensor<T>::RandomUniform(spec.shape, -limit, limit, rng));
        break;
      }
      case ParamSpec::Init::kZeros:
        p.values.push_back(BasicTensor<T>::Zeros(spec.shape));
        break;
      case ParamSpec::Init::kOnes:
        p.values.push_back(BasicTensor<T>::Full(spec.shape, T(1)));
        break;
      case ParamSpec::Init::kLatent:
        p.values.push_back(BasicTensor<T>::RandomNormal(spec.shape, 0.02, rng));
        break;
    }
  }
  return p;
}

template <typename T>
std::size_t BasicDecoderParams<T>::Find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw std::out_of_range("no parameter named " + name);
}

template <typename T>
std::size_t BasicDecoderParams<T>::NumScalars() const {
  std::size_t n = 0;
  for (const auto& v : values) n += v.size();
  return n;
}

template <typename T>
bool BasicDecoderParams<T>::AllFinite() const {
  for (const auto& v : values)
    if (!v.AllFinite()) return false;
  return true;
}

template <typename T>
DecoderWeights<T> BindDecoder(BasicTape<T>& tape, const BasicDecoderParams<T>& params, bool requires_grad) {
  const auto layout = DecoderLayout(params.config);
  if (layout.size() != params.values.size()) throw std::invalid_argument("parameter count does not match config");
  std::vector<BasicVar<T>> leaves;
  for (const auto& v : params.values) leaves.push_back(tape.Leaf(v, requires_grad));
  return AssembleDecoder(params.config, std::move(leaves));
}

template <typename T>
DecoderWeights<T> AssembleDecoder(const DecoderConfig& config, std::vector<BasicVar<T>> leaves) {
  const auto layout = DecoderLayout(config);
  if (layout.size() != leaves.size()) throw std::invalid_argument("parameter count does not match config");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (leaves[i].shape() != layout[i].shape) {
      throw ShapeError("parameter " + layout[i].name + " has shape " + ShapeToString(leaves[i].shape()));
    }
  }
  DecoderWeights<T> w;
  w.leaves = std::move(leaves);
  std::size_t next = 0;
  auto take = [&]() { return w.leaves[next++]; };
  auto attn = [&]() {
    AttentionWeights<T> a;
    a.wq = take(), a.bq = take();
    a.wk = take(), a.bk = take();
    a.wv = take(), a.bv = take();
    a.wo = take(), a.bo = take();
    return a;
  };
  auto mlp = [&]() {
    MlpWeights<T> m;
    m.w1 = take(), m.b1 = take(), m.w2 = take(), m.b2 = take();
    return m;
  };
  for (std::uint32_t i = 0; i < config.ca_blocks; ++i) {
    CaBlockWeights<T> b;
    b.ln1_gain = take(), b.ln1_bias = take();
    b.self_attn = attn();
    b.ln2_gain = take(), b.ln2_bias = take();
    b.cross_attn = attn();
    b.ln3_gain = take(), b.ln3_bias = take();
    b.mlp = mlp();
    w.ca.push_back(b);
  }
  for (std::uint32_t i = 0; i < config.wsa_blocks; ++i) {
    WsaBlockWeights<T> b;
    b.ln1_gain = take(), b.ln1_bias = take();
    b.attn = attn();
    b.ln2_gain = take(), b.ln2_bias = take();
    b.mlp = mlp();
    w.wsa.push_back(b);
  }
  w.head_w = take();
  w.head_b = take();
  w.z0 = take();
  return w;
}

namespace {

template <typename T>
BasicVar<T> Mlp(const MlpWeights<T>& m, BasicVar<T> x) {
  return Linear(Gelu(Linear(x, m.w1, m.b1)), m.w2, m.b2);
}

}  // namespace

template <typename T>
BasicVar<T> CaBlock(const CaBlockWeights<T>& w, BasicVar<T> z, std::span<const BasicVar<T>> exemplars,
                    std::size_t heads) {
  if (exemplars.empty()) throw std::invalid_argument("cross-attention needs at least one exemplar");
  const std::size_t m = z.value().dim(0);
  const auto& sa = w.self_attn;
  auto x = LayerNorm(z, w.ln1_gain, w.ln1_bias);
  auto self = Attention(Linear(x, sa.wq, sa.bq), Linear(x, sa.wk, sa.bk), Linear(x, sa.wv, sa.bv), heads,
                        AttentionLayout::Dense(m, m));
  auto z1 = Add(Linear(self, sa.wo, sa.bo), z);

  const auto& ca = w.cross_attn;
  auto q = Linear(LayerNorm(z1, w.ln2_gain, w.ln2_bias), ca.wq, ca.bq);
  std::vector<BasicVar<T>> outs;
  outs.reserve(exemplars.size());
  for (const auto& e : exemplars) {
    if (e.value().rank() != 2 || e.value().dim(1) != z.value().dim(1)) {
      throw ShapeError("exemplar channels " + ShapeToString(e.shape()) + " do not match video " +
                       ShapeToString(z.shape()));
    }
    outs.push_back(Attention(q, Linear(e, ca.wk, ca.bk), Linear(e, ca.wv, ca.bv), heads,
                             AttentionLayout::Dense(m, e.value().dim(0))));
  }
  // mean over exemplars, then the shared output projection
  auto fused = outs.size() == 1 ? outs[0] : MeanOf(std::span<const BasicVar<T>>(outs));
  auto z2 = Add(Linear(fused, ca.wo, ca.bo), z1);
  return Add(Mlp(w.mlp, LayerNorm(z2, w.ln3_gain, w.ln3_bias)), z2);
}

template <typename T>
BasicVar<T> WsaBlock(const WsaBlockWeights<T>& w, BasicVar<T> z, const TokenGrid& grid,
                     std::array<std::uint32_t, 3> window, bool shifted, std::size_t heads) {
  if (z.value().rank() != 2 || z.value().dim(0) != grid.tokens()) {
    throw ShapeError("windowed attention: " + ShapeToString(z.shape()) + " does not match the token grid");
  }
  const auto& a = w.attn;
  auto x = LayerNorm(z, w.ln1_gain, w.ln1_bias);
  auto att = Attention(Linear(x, a.wq, a.bq), Linear(x, a.wk, a.bk), Linear(x, a.wv, a.bv), heads,
                       WindowLayout(grid, window, shifted));
  auto z1 = Add(Linear(att, a.wo, a.bo), z);
  return Add(Mlp(w.mlp, LayerNorm(z1, w.ln2_gain, w.ln2_bias)), z1);
}

template <typename T>
BasicVar<T> DensityHead(BasicVar<T> w, BasicVar<T> b, BasicVar<T> z, const TokenGrid& grid,
                        HeadAggregation aggregation, HeadActivation activation) {
  if (z.value().rank() != 2 || z.value().dim(0) != grid.tokens()) {
    throw ShapeError("density head: " + ShapeToString(z.shape()) + " does not match the token grid");
  }
  auto per_token = Linear(z, w, b);
  if (activation == HeadActivation::kSoftplus) per_token = Softplus(per_token);
  auto by_time = Reshape(per_token, {grid.t, grid.spatial()});
  return aggregation == HeadAggregation::kSum ? SumLastDim(by_time) : MeanLastDim(by_time);
}

template <typename T>
BasicVar<T> DecoderForward(const DecoderWeights<T>& w, const DecoderConfig& config, BasicVar<T> video,
                           const TokenGrid& grid, std::span<const BasicVar<T>> exemplars) {
  if (video.value().rank() != 2 || video.value().dim(1) != config.channels) {
    throw ShapeError("decoder: video latents " + ShapeToString(video.shape()) + " do not have " +
                     std::to_string(config.channels) + " channels");
  }
  if (grid.h != config.window_grid.h || grid.w != config.window_grid.w) {
    throw ShapeError("decoder: spatial grid differs from the configured encoder grid");
  }
  std::vector<BasicVar<T>> z0{w.z0};
  const std::span<const BasicVar<T>> refs = exemplars.empty() ? std::span<const BasicVar<T>>(z0) : exemplars;
  auto z = video;
  for (const auto& block : w.ca) z = CaBlock(block, z, refs, config.heads);
  for (std::size_t i = 0; i < w.wsa.size(); ++i) z = WsaBlock(w.wsa[i], z, grid, config.window, i > 0, config.heads);
  return DensityHead(w.head_w, w.head_b, z, grid, config.aggregation, config.activation);
}

void SetHeadPrior(DecoderParams& params, double mean_density) {
  if (!(mean_density > 0) || !std::isfinite(mean_density)) throw std::invalid_argument("head prior must be positive");
  const double per_token = params.config.aggregation == HeadAggregation::kSum
                               ? mean_density / static_cast<double>(params.config.window_grid.spatial())
                               : mean_density;
  const double b = params.config.activation == HeadActivation::kSoftplus ? std::log(std::expm1(per_token)) : per_token;
  params.values[params.Find("head.b")][0] = static_cast<float>(b);
}

DensityMap Predict(const DecoderParams& params, const FeatureSequence& seq, std::span<const ExemplarLatent> exemplars) {
  seq.Validate();
  Tape tape;
  const auto w = BindDecoder(tape, params, false);
  std::vector<Var> refs;
  for (const auto& e : exemplars) refs.push_back(tape.Constant(e.tokens));
  const auto d = DecoderForward(w, params.config, tape.Constant(seq.tokens), seq.grid, std::span<const Var>(refs));
  DensityMap map;
  map.frames_per_token = seq.frames_per_token();
  const auto& values = d.value().storage();
  map.values.assign(values.begin(), values.end());
  return map;
}

#define ESCOUNTS_INSTANTIATE_DECODER(T)                                                                        \
  template struct BasicDecoderParams<T>;                                                                       \
  template DecoderWeights<T> BindDecoder<T>(BasicTape<T>&, const BasicDecoderParams<T>&, bool);                \
  template DecoderWeights<T> AssembleDecoder<T>(const DecoderConfig&, std::vector<BasicVar<T>>);               \
  template BasicVar<T> CaBlock<T>(const CaBlockWeights<T>&, BasicVar<T>, std::span<const BasicVar<T>>,         \
                                  std::size_t);                                                                \
  template BasicVar<T> WsaBlock<T>(const WsaBlockWeights<T>&, BasicVar<T>, const TokenGrid&,                   \
                                   std::array<std::uint32_t, 3>, bool, std::size_t);                           \
  template BasicVar<T> DensityHead<T>(BasicVar<T>, BasicVar<T>, BasicVar<T>, const TokenGrid&, HeadAggregation, \
                                      HeadActivation);                                                         \
  template BasicVar<T> DecoderForward<T>(const DecoderWeights<T>&, const DecoderConfig&, BasicVar<T>,          \
                                         const TokenGrid&, std::span<const BasicVar<T>>);

ESCOUNTS_INSTANTIATE_DECODER(float)
ESCOUNTS_INSTANTIATE_DECODER(double)

}  // namespace escounts
