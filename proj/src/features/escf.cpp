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

#include "escounts/features.hpp"

namespace escounts {
namespace {

constexpr char kMagic[4] = {'E', 'S', 'C', 'F'};
constexpr std::size_t kHeaderBytes = 4 + 7 * 4;

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[offset + i]} << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> EncodeFeatures(const FeatureSequence& seq) {
  seq.Validate();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + seq.tokens.size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutU32(out, kFeatureFormatVersion);
  PutU32(out, seq.grid.t);
  PutU32(out, seq.grid.h);
  PutU32(out, seq.grid.w);
  PutU32(out, static_cast<std::uint32_t>(seq.channels()));
  PutU32(out, seq.raw_frames);
  PutU32(out, seq.frames_per_window);
  for (float v : seq.tokens.storage()) PutU32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureSequence DecodeFeatures(std::span<const std::uint8_t> bytes, std::string source_id) {
  using Kind = FeatureFormatErrorKind;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FeatureFormatError(Kind::kBadMagic, source_id + ": not an ESCF file");
  }
  if (bytes.size() < kHeaderBytes) throw FeatureFormatError(Kind::kTruncated, source_id + ": truncated header");
  const std::uint32_t version = GetU32(bytes, 4);
  if (version != kFeatureFormatVersion) {
    throw FeatureFormatError(Kind::kVersionMismatch,
                             source_id + ": unsupported ESCF version " + std::to_string(version));
  }
  FeatureSequence seq;
  seq.source_id = std::move(source_id);
  seq.grid = {GetU32(bytes, 8), GetU32(bytes, 12), GetU32(bytes, 16)};
  const std::uint32_t c = GetU32(bytes, 20);
  seq.raw_frames = GetU32(bytes, 24);
  seq.frames_per_window = GetU32(bytes, 28);
  if (seq.grid.tokens() == 0 || c == 0 || seq.raw_frames == 0 || seq.frames_per_window == 0) {
    throw FeatureFormatError(Kind::kDimensionMismatch, seq.source_id + ": zero-sized header dimension");
  }
  const std::uint64_t expected = std::uint64_t{seq.grid.tokens()} * c * 4;
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (payload < expected) {
    throw FeatureFormatError(Kind::kTruncated, seq.source_id + ": payload holds " + std::to_string(payload / 4) +
                                                   " floats, header needs " + std::to_string(expected / 4));
  }
  if (payload > expected) {
    throw FeatureFormatError(Kind::kDimensionMismatch,
                             seq.source_id + ": payload longer than M*C = " + std::to_string(expected / 4));
  }
  std::vector<float> data(seq.grid.tokens() * c);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::bit_cast<float>(GetU32(bytes, kHeaderBytes + 4 * i));
  seq.tokens = Tensor({seq.grid.tokens(), c}, std::move(data));
  return seq;
}

void SaveFeatures(const FeatureSequence& seq, const std::filesystem::path& path) {
  const auto bytes = EncodeFeatures(seq);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FeatureFormatError(FeatureFormatErrorKind::kIo, "cannot write " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FeatureFormatError(FeatureFormatErrorKind::kIo, "write failed for " + path.string());
}

FeatureSequence LoadFeatures(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FeatureFormatError(FeatureFormatErrorKind::kIo, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return DecodeFeatures(bytes, path.stem().string());
}

}  // namespace escounts
