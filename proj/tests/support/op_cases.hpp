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


// Every differentiable op with small random-input shapes, each reduced to a scalar.

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "escounts/numerics/ops.hpp"
#include "support/gradcheck.hpp"

namespace escounts::testing {

struct OpCase {
  const char* name;
  std::vector<Shape> shapes;
  std::function<VarD(TapeD&, const std::vector<VarD>&)> build;
};

inline std::vector<OpCase> AllOps() {
  return {
      {"matmul", {{3, 4}, {4, 2}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, MatMul(v[0], v[1])); }},
      {"transpose", {{3, 4}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Transpose(v[0])); }},
      {"add", {{2, 3}, {2, 3}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Add(v[0], v[1])); }},
      {"sub", {{2, 3}, {2, 3}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Sub(v[0], v[1])); }},
      {"mul", {{2, 3}, {2, 3}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Mul(v[0], v[1])); }},
      {"scale", {{2, 3}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Scale(v[0], -1.7)); }},
      {"add_row_broadcast", {{3, 4}, {4}},
       [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, AddRowBroadcast(v[0], v[1])); }},
      {"linear", {{3, 4}, {4, 5}, {5}},
       [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Linear(v[0], v[1], v[2])); }},
      {"mean_of", {{2, 3}, {2, 3}, {2, 3}},
       [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, MeanOf<double>(std::span(v))); }},
      {"layer_norm", {{4, 6}, {6}, {6}},
       [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, LayerNorm(v[0], v[1], v[2])); }},
      {"softmax", {{3, 5}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, SoftmaxLastDim(v[0])); }},
      {"gelu", {{3, 5}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Gelu(v[0])); }},
      {"softplus", {{3, 5}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Softplus(v[0])); }},
      {"square", {{3, 5}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Square(v[0])); }},
      {"abs", {{3, 5}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Abs(v[0])); }},
      {"sum", {{3, 5}}, [](TapeD&, const std::vector<VarD>& v) { return Sum(v[0]); }},
      {"mean", {{3, 5}}, [](TapeD&, const std::vector<VarD>& v) { return Mean(v[0]); }},
      {"sum_last_dim", {{3, 5}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, SumLastDim(v[0])); }},
      {"mean_last_dim", {{3, 5}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, MeanLastDim(v[0])); }},
      {"reshape", {{3, 4}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, Reshape(v[0], {4, 3})); }},
      {"slice_cols", {{3, 6}}, [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, SliceCols(v[0], 2, 3)); }},
      {"concat_cols", {{3, 2}, {3, 4}},
       [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, ConcatCols<double>(std::span(v))); }},
      {"gather_rows", {{4, 3}},
       [](TapeD& t, const std::vector<VarD>& v) { return WeightedSum(t, GatherRows(v[0], {3, 0, 3, 1})); }},
      {"attention_dense", {{5, 8}, {6, 8}, {6, 8}},
       [](TapeD& t, const std::vector<VarD>& v) {
         return WeightedSum(t, Attention(v[0], v[1], v[2], 2, AttentionLayout::Dense(5, 6)));
       }},
      {"attention_grouped", {{6, 8}, {6, 8}, {6, 8}},
       [](TapeD& t, const std::vector<VarD>& v) {
         auto layout = std::make_shared<AttentionLayout>();
         layout->groups.push_back({{0, 2, 4}, {0, 2, 4}});
         layout->groups.push_back({{1, 5}, {1, 3, 5}});
         layout->groups.push_back({{3}, {3}});
         return WeightedSum(t, Attention(v[0], v[1], v[2], 4, layout));
       }},
  };
}

}  // namespace escounts::testing
