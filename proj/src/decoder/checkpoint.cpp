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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "escounts/decoder.hpp"

namespace escounts {
namespace {

constexpr char kMagic[4] = {'E', 'S', 'C', 'K'};

class Writer {
 public:
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    U32(static_cast<std::uint32_t>(v));
    U32(static_cast<std::uint32_t>(v >> 32));
  }
  void Str(const std::string& s) {
    U32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void Floats(const Tensor& t) {
    for (float v : t.storage()) U32(std::bit_cast<std::uint32_t>(v));
  }
  void Raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(bytes_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t U64() {
    const std::uint64_t lo = U32();
    return lo | (std::uint64_t{U32()} << 32);
  }
  std::string Str() {
    const std::uint32_t n = U32();
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Tensor Floats(Shape shape) {
    Tensor t(std::move(shape));
    Need(t.size() * 4);
    for (float& v : t.storage()) v = std::bit_cast<float>(U32());
    return t;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint is truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

void WriteConfig(Writer& w, const DecoderConfig& c) {
  for (std::uint32_t v : {c.ca_blocks, c.wsa_blocks, c.channels, c.heads, c.exemplar_tokens, c.mlp_ratio,
                          c.window_grid.t, c.window_grid.h, c.window_grid.w, c.window[0], c.window[1], c.window[2],
                          static_cast<std::uint32_t>(c.aggregation), static_cast<std::uint32_t>(c.activation)}) {
    w.U32(v);
  }
}

DecoderConfig ReadConfig(Reader& r) {
  DecoderConfig c;
  c.ca_blocks = r.U32();
  c.wsa_blocks = r.U32();
  c.channels = r.U32();
  c.heads = r.U32();
  c.exemplar_tokens = r.U32();
  c.mlp_ratio = r.U32();
  c.window_grid.t = r.U32();
  c.window_grid.h = r.U32();
  c.window_grid.w = r.U32();
  for (auto& v : c.window) v = r.U32();
  const std::uint32_t agg = r.U32(), act = r.U32();
  if (agg > 1 || act > 1) throw CheckpointError("checkpoint has an unknown head mode");
  c.aggregation = static_cast<HeadAggregation>(agg);
  c.activation = static_cast<HeadActivation>(act);
  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint config invalid: ") + e.what());
  }
  return c;
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const DecoderParams& params, const TrainingState* state) {
  Writer w;
  w.Raw(kMagic, 4);
  w.U32(kCheckpointVersion);
  WriteConfig(w, params.config);
  w.U32(static_cast<std::uint32_t>(params.values.size()));
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    w.Str(params.names[i]);
    const auto& t = params.values[i];
    w.U32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.U32(static_cast<std::uint32_t>(d));
    w.Floats(t);
  }
  w.U32(state ? 1 : 0);
  if (state) {
    if (state->m.size() != params.values.size() || state->v.size() != params.values.size()) {
      throw CheckpointError("optimizer state does not match the parameters");
    }
    w.U32(state->epoch);
    w.U64(state->step);
    w.Str(state->rng_state);
    for (const auto& t : state->m) w.Floats(t);
    for (const auto& t : state->v) w.Floats(t);
  }
  // write to a temp file, then rename
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw CheckpointError("cannot write " + tmp);
    os.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
    if (!os) throw CheckpointError("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot read checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(path.string() + ": not a checkpoint file");
  }
  Reader r(bytes.substr(4));
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.params.config = ReadConfig(r);
  const auto layout = DecoderLayout(ck.params.config);
  const std::uint32_t n = r.U32();
  if (n != layout.size()) throw CheckpointError("checkpoint parameter count does not match its config");
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.Str();
    Shape shape(r.U32());
    for (auto& d : shape) d = r.U32();
    if (name != layout[i].name || shape != layout[i].shape) {
      throw CheckpointError("checkpoint parameter " + name + " does not match the layout");
    }
    ck.params.names.push_back(std::move(name));
    ck.params.values.push_back(r.Floats(std::move(shape)));
  }
  if (r.U32() == 1) {
    TrainingState st;
    st.epoch = r.U32();
    st.step = r.U64();
    st.rng_state = r.Str();
    for (const auto& v : ck.params.values) st.m.push_back(r.Floats(v.shape()));
    for (const auto& v : ck.params.values) st.v.push_back(r.Floats(v.shape()));
    ck.state = std::move(st);
  }
  if (!r.AtEnd()) throw CheckpointError("trailing bytes after checkpoint payload");
  if (!ck.params.AllFinite()) throw CheckpointError("checkpoint holds non-finite weights");
  return ck;
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path, const DecoderConfig& expected) {
  auto ck = LoadCheckpoint(path);
  if (!(ck.params.config == expected)) throw CheckpointError("checkpoint config differs from the requested config");
  return ck;
}

}  // namespace escounts
