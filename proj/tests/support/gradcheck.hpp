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

// Central finite-difference gradient oracle. Independent of the tape: it only
// re-evaluates the scalar loss with perturbed leaf values.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "escounts/numerics/ops.hpp"
#include "escounts/numerics/tape.hpp"

namespace escounts::testing {

struct GradCheckResult {
  double max_rel_error = 0;
  std::string worst;  // "leaf[i]" of the worst entry
  std::size_t checked = 0;
};

// Relative error with both-near-zero entries treated as agreeing.
inline double RelativeError(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  const double diff = std::abs(analytic - numeric);
  if (scale < 1e-7) return diff < 1e-9 ? 0.0 : diff / 1e-7;
  return diff / scale;
}

enum class Stencil { kTwoPoint, kFourPoint };

// `loss` builds a scalar on the tape from leaves bound to `inputs`. The
// four-point central stencil has O(h^4) truncation error.
template <typename T>
GradCheckResult CheckGradients(
    std::vector<BasicTensor<T>> inputs,
    const std::function<BasicVar<T>(BasicTape<T>&, const std::vector<BasicVar<T>>&)>& loss,
    double step = 1e-3, Stencil stencil = Stencil::kTwoPoint) {
  std::vector<BasicTensor<T>> analytic;
  {
    BasicTape<T> tape;
    std::vector<BasicVar<T>> leaves;
    for (const auto& t : inputs) leaves.push_back(tape.Leaf(t));
    auto out = loss(tape, leaves);
    tape.Backward(out);
    for (const auto& l : leaves) analytic.push_back(tape.grad(l));
  }
  auto eval = [&](const std::vector<BasicTensor<T>>& values) {
    BasicTape<T> tape;
    std::vector<BasicVar<T>> leaves;
    for (const auto& t : values) leaves.push_back(tape.Leaf(t, false));
    return static_cast<double>(loss(tape, leaves).value().item());
  };
  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto at = [&](double offset) {
        auto moved = inputs;
        moved[k][i] = static_cast<T>(moved[k][i] + offset);
        return eval(moved);
      };
      const double numeric = stencil == Stencil::kTwoPoint
                                 ? (at(step) - at(-step)) / (2 * step)
                                 : (8 * (at(step) - at(-step)) - (at(2 * step) - at(-2 * step))) / (12 * step);
      const double err = RelativeError(analytic[k][i], numeric);
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = "input" + std::to_string(k) + "[" + std::to_string(i) + "] analytic=" +
                       std::to_string(analytic[k][i]) + " numeric=" + std::to_string(numeric);
      }
    }
  }
  return result;
}

// Weighted sum with fixed pseudo-random weights so every output entry matters.
template <typename T>
BasicVar<T> WeightedSum(BasicTape<T>& tape, BasicVar<T> x, unsigned seed = 7) {
  std::mt19937_64 rng(seed);
  auto w = BasicTensor<T>::RandomUniform(x.shape(), -1.0, 1.0, rng);
  return Sum(Mul(x, tape.Constant(std::move(w))));
}

}  // namespace escounts::testing
