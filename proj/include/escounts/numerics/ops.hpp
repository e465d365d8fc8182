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

// Differentiable operations on BasicVar<T>. Every op records its output on the
// tape of its inputs. Instantiated for float and double.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "escounts/numerics/tape.hpp"

namespace escounts {

// Default layer-norm epsilon, added to the variance.
inline constexpr double kLayerNormEps = 1e-5;

template <typename T> BasicVar<T> MatMul(BasicVar<T> a, BasicVar<T> b);
template <typename T> BasicVar<T> Transpose(BasicVar<T> a);

template <typename T> BasicVar<T> Add(BasicVar<T> a, BasicVar<T> b);
template <typename T> BasicVar<T> Sub(BasicVar<T> a, BasicVar<T> b);
template <typename T> BasicVar<T> Mul(BasicVar<T> a, BasicVar<T> b);
template <typename T> BasicVar<T> Scale(BasicVar<T> a, double factor);
template <typename T> BasicVar<T> AddScalar(BasicVar<T> a, double offset);
// x: [n, c], bias: [c].
template <typename T> BasicVar<T> AddRowBroadcast(BasicVar<T> x, BasicVar<T> bias);
// x·w + b with x: [n, k], w: [k, m], b: [m].
template <typename T> BasicVar<T> Linear(BasicVar<T> x, BasicVar<T> w, BasicVar<T> b);
// Elementwise mean of equally shaped inputs.
template <typename T> BasicVar<T> MeanOf(std::span<const BasicVar<T>> xs);

// Per-row normalization over the last dim. Zero-variance rows normalize to 0.
template <typename T>
BasicVar<T> LayerNorm(BasicVar<T> x, BasicVar<T> gain, BasicVar<T> bias, double eps = kLayerNormEps);
template <typename T> BasicVar<T> SoftmaxLastDim(BasicVar<T> x);
// Exact (erf) GELU.
template <typename T> BasicVar<T> Gelu(BasicVar<T> x);
template <typename T> BasicVar<T> Softplus(BasicVar<T> x);
template <typename T> BasicVar<T> Square(BasicVar<T> x);
// Subgradient 0 at 0.
template <typename T> BasicVar<T> Abs(BasicVar<T> x);

template <typename T> BasicVar<T> Sum(BasicVar<T> x);
template <typename T> BasicVar<T> Mean(BasicVar<T> x);
// [r, c] -> [r]
template <typename T> BasicVar<T> SumLastDim(BasicVar<T> x);
template <typename T> BasicVar<T> MeanLastDim(BasicVar<T> x);
template <typename T> BasicVar<T> Reshape(BasicVar<T> x, Shape shape);
template <typename T> BasicVar<T> SliceCols(BasicVar<T> x, std::size_t start, std::size_t count);
template <typename T> BasicVar<T> ConcatCols(std::span<const BasicVar<T>> xs);
template <typename T> BasicVar<T> GatherRows(BasicVar<T> x, std::vector<std::uint32_t> rows);

// One attention group: each listed query row attends over the listed key rows.
struct AttentionGroup {
  std::vector<std::uint32_t> queries;
  std::vector<std::uint32_t> keys;
};

// Partition of query rows into groups. Query rows absent from every group get a
// zero output. Masking is expressed by splitting groups, so the kernel needs no
// additive mask.
struct AttentionLayout {
  std::vector<AttentionGroup> groups;

  static std::shared_ptr<const AttentionLayout> Dense(std::size_t num_queries, std::size_t num_keys);
};

// Multi-head scaled dot-product attention over already-projected q [Mq, C],
// k [Mk, C], v [Mk, C]. Heads split C into equal contiguous slices.
template <typename T>
BasicVar<T> Attention(BasicVar<T> q, BasicVar<T> k, BasicVar<T> v, std::size_t heads,
                      std::shared_ptr<const AttentionLayout> layout);

}  // namespace escounts
