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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace escounts {

// Raised on shape mismatches and invalid tensor construction.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when an operation produces NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

inline std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

inline std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// Dense row-major tensor with value semantics. The production scalar is
// float; the double instantiation exists for finite-difference checking.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape) : shape_(std::move(shape)), data_(NumElements(shape_), T(0)) {}
  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (NumElements(shape_) != data_.size()) {
      throw ShapeError("tensor shape " + ShapeToString(shape_) + " does not match " +
                       std::to_string(data_.size()) + " values");
    }
  }

  static BasicTensor Zeros(Shape shape) { return BasicTensor(std::move(shape)); }
  static BasicTensor Full(Shape shape, T value) {
    BasicTensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }
  static BasicTensor Scalar(T value) { return BasicTensor({1}, {value}); }
  static BasicTensor FromRows(std::initializer_list<std::initializer_list<T>> rows) {
    const std::size_t n = rows.size();
    const std::size_t c = n ? rows.begin()->size() : 0;
    std::vector<T> data;
    data.reserve(n * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw ShapeError("ragged rows");
      data.insert(data.end(), row.begin(), row.end());
    }
    return BasicTensor({n, c}, std::move(data));
  }
  // Entries drawn from N(0, stddev^2).
  static BasicTensor RandomNormal(Shape shape, double stddev, std::mt19937_64& rng) {
    BasicTensor t(std::move(shape));
    std::normal_distribution<double> dist(0.0, stddev);
    for (T& v : t.data_) v = static_cast<T>(dist(rng));
    return t;
  }
  static BasicTensor RandomUniform(Shape shape, double lo, double hi, std::mt19937_64& rng) {
    BasicTensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(lo, hi);
    for (T& v : t.data_) v = static_cast<T>(dist(rng));
    return t;
  }

  template <typename U>
  BasicTensor<U> Cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, std::move(out));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const {
    if (axis >= shape_.size()) throw ShapeError("axis out of range for " + ShapeToString(shape_));
    return shape_[axis];
  }
  std::size_t size() const { return data_.size(); }

  // Rank-1 tensors are treated as a single row.
  std::size_t rows() const {
    if (shape_.size() == 1) return 1;
    if (shape_.size() != 2) throw ShapeError("expected rank-2 tensor, got " + ShapeToString(shape_));
    return shape_[0];
  }
  std::size_t cols() const {
    if (shape_.size() == 1) return shape_[0];
    if (shape_.size() != 2) throw ShapeError("expected rank-2 tensor, got " + ShapeToString(shape_));
    return shape_[1];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  T at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  T item() const {
    if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + ShapeToString(shape_));
    return data_[0];
  }

  bool AllFinite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  BasicTensor Reshaped(Shape shape) const { return BasicTensor(std::move(shape), data_); }

  bool operator==(const BasicTensor& other) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

}  // namespace escounts
