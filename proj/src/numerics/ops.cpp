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

#include "escounts/numerics/ops.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace escounts {
namespace {

template <typename T>
using TensorOf = BasicTensor<T>;

void RequireSameShape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + ShapeToString(a) + " vs " +
                     ShapeToString(b));
  }
}

void RequireRank2(const Shape& s, const char* op) {
  if (s.size() != 2) throw ShapeError(std::string(op) + ": expected rank-2 input, got " + ShapeToString(s));
}

// c[n, m] += a[n, k] * b[k, m]
template <typename T>
void GemmNN(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    T* ci = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      if (av == T(0)) continue;
      const T* bp = b + p * m;
      for (std::size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
    }
  }
}

// c[n, k] += a[n, m] * b[k, m]^T
template <typename T>
void GemmNT(const T* a, const T* b, T* c, std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* ai = a + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T* bp = b + p * m;
      T acc = 0;
      for (std::size_t j = 0; j < m; ++j) acc += ai[j] * bp[j];
      c[i * k + p] += acc;
    }
  }
}

// c[k, m] += a[n, k]^T * b[n, m]
template <typename T>
void GemmTN(const T* a, const T* b, T* c, std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* bi = b + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      if (av == T(0)) continue;
      T* cp = c + p * m;
      for (std::size_t j = 0; j < m; ++j) cp[j] += av * bi[j];
    }
  }
}

template <typename T>
void Accumulate(BasicTape<T>& tape, std::size_t id, const TensorOf<T>& g) {
  if (!tape.NeedsGrad(id)) return;
  auto& dst = tape.MutableGrad(id);
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

template <typename T, typename F, typename D>
BasicVar<T> Unary(const char* name, BasicVar<T> x, F f, D df) {
  const auto& xv = x.value();
  TensorOf<T> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  const std::size_t xid = x.id;
  return x.tape->Record(name, std::move(out), {x}, [xid, df](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
    if (!tape.NeedsGrad(xid)) return;
    const auto& xv = tape.value(BasicVar<T>{&tape, xid});
    auto& dx = tape.MutableGrad(xid);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * df(xv[i]);
  });
}

}  // namespace

template <typename T>
BasicVar<T> MatMul(BasicVar<T> a, BasicVar<T> b) {
  const auto& av = a.value();
  const auto& bv = b.value();
  RequireRank2(av.shape(), "matmul");
  RequireRank2(bv.shape(), "matmul");
  const std::size_t n = av.dim(0), k = av.dim(1), m = bv.dim(1);
  if (bv.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions disagree " + ShapeToString(av.shape()) + " x " +
                     ShapeToString(bv.shape()));
  }
  TensorOf<T> out({n, m});
  GemmNN(av.storage().data(), bv.storage().data(), out.storage().data(), n, k, m);
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->Record("matmul", std::move(out), {a, b},
                        [aid, bid, n, k, m](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
                          const auto& av = tape.value(BasicVar<T>{&tape, aid});
                          const auto& bv = tape.value(BasicVar<T>{&tape, bid});
                          if (tape.NeedsGrad(aid)) {
                            GemmNT(g.storage().data(), bv.storage().data(),
                                   tape.MutableGrad(aid).storage().data(), n, m, k);
                          }
                          if (tape.NeedsGrad(bid)) {
                            GemmTN(av.storage().data(), g.storage().data(),
                                   tape.MutableGrad(bid).storage().data(), n, k, m);
                          }
                        });
}

template <typename T>
BasicVar<T> Transpose(BasicVar<T> a) {
  const auto& av = a.value();
  RequireRank2(av.shape(), "transpose");
  const std::size_t n = av.dim(0), m = av.dim(1);
  TensorOf<T> out({m, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = av[i * m + j];
  const std::size_t aid = a.id;
  return a.tape->Record("transpose", std::move(out), {a}, [aid, n, m](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
    if (!tape.NeedsGrad(aid)) return;
    auto& da = tape.MutableGrad(aid);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) da[i * m + j] += g[j * n + i];
  });
}

template <typename T>
BasicVar<T> Add(BasicVar<T> a, BasicVar<T> b) {
  RequireSameShape(a.shape(), b.shape(), "add");
  TensorOf<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->Record("add", std::move(out), {a, b}, [aid, bid](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
    Accumulate(tape, aid, g);
    Accumulate(tape, bid, g);
  });
}

template <typename T>
BasicVar<T> Sub(BasicVar<T> a, BasicVar<T> b) {
  RequireSameShape(a.shape(), b.shape(), "sub");
  TensorOf<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->Record("sub", std::move(out), {a, b}, [aid, bid](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
    Accumulate(tape, aid, g);
    if (tape.NeedsGrad(bid)) {
      auto& db = tape.MutableGrad(bid);
      for (std::size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
    }
  });
}

template <typename T>
BasicVar<T> Mul(BasicVar<T> a, BasicVar<T> b) {
  RequireSameShape(a.shape(), b.shape(), "mul");
  TensorOf<T> out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t aid = a.id, bid = b.id;
  return a.tape->Record("mul", std::move(out), {a, b}, [aid, bid](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
    const auto& av = tape.value(BasicVar<T>{&tape, aid});
    const auto& bv = tape.value(BasicVar<T>{&tape, bid});
    if (tape.NeedsGrad(aid)) {
      auto& da = tape.MutableGrad(aid);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv[i];
    }
    if (tape.NeedsGrad(bid)) {
      auto& db = tape.MutableGrad(bid);
      for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * av[i];
    }
  });
}

template <typename T>
BasicVar<T> Scale(BasicVar<T> a, double factor) {
  const T f = static_cast<T>(factor);
  return Unary<T>("scale", a, [f](T x) { return x * f; }, [f](T) { return f; });
}

template <typename T>
BasicVar<T> AddScalar(BasicVar<T> a, double offset) {
  const T o = static_cast<T>(offset);
  return Unary<T>("add_scalar", a, [o](T x) { return x + o; }, [](T) { return T(1); });
}

template <typename T>
BasicVar<T> AddRowBroadcast(BasicVar<T> x, BasicVar<T> bias) {
  const auto& xv = x.value();
  const auto& bv = bias.value();
  RequireRank2(xv.shape(), "add_row_broadcast");
  const std::size_t n = xv.dim(0), c = xv.dim(1);
  if (bv.size() != c) throw ShapeError("add_row_broadcast: bias size does not match channels");
  TensorOf<T> out = xv;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += bv[j];
  const std::size_t xid = x.id, bid = bias.id;
  return x.tape->Record("add_row_broadcast", std::move(out), {x, bias},
                        [xid, bid, n, c](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
                          Accumulate(tape, xid, g);
                          if (tape.NeedsGrad(bid)) {
                            auto& db = tape.MutableGrad(bid);
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < c; ++j) db[j] += g[i * c + j];
                          }
                        });
}

template <typename T>
BasicVar<T> Linear(BasicVar<T> x, BasicVar<T> w, BasicVar<T> b) {
  return AddRowBroadcast(MatMul(x, w), b);
}

template <typename T>
BasicVar<T> MeanOf(std::span<const BasicVar<T>> xs) {
  if (xs.empty()) throw ShapeError("mean_of: no inputs");
  const Shape& shape = xs[0].shape();
  TensorOf<T> out(shape);
  for (const auto& x : xs) {
    RequireSameShape(shape, x.shape(), "mean_of");
    const auto& xv = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += xv[i];
  }
  const T inv = T(1) / static_cast<T>(xs.size());
  for (auto& v : out.storage()) v *= inv;
  std::vector<BasicVar<T>> inputs(xs.begin(), xs.end());
  std::vector<std::size_t> ids;
  for (const auto& x : xs) ids.push_back(x.id);
  return xs[0].tape->Record("mean_of", std::move(out), inputs, [ids, inv](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
    for (std::size_t id : ids) {
      if (!tape.NeedsGrad(id)) continue;
      auto& dx = tape.MutableGrad(id);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * inv;
    }
  });
}

template <typename T>
BasicVar<T> LayerNorm(BasicVar<T> x, BasicVar<T> gain, BasicVar<T> bias, double eps) {
  const auto& xv = x.value();
  RequireRank2(xv.shape(), "layer_norm");
  const std::size_t n = xv.dim(0), c = xv.dim(1);
  if (gain.value().size() != c || bias.value().size() != c) {
    throw ShapeError("layer_norm: gain/bias must have " + std::to_string(c) + " entries");
  }
  const auto& gv = gain.value();
  const auto& bv = bias.value();
  TensorOf<T> out({n, c});
  // normalized values and per-row inverse std are kept for backward
  auto xhat = std::make_shared<std::vector<T>>(n * c);
  auto inv_std = std::make_shared<std::vector<T>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = xv.storage().data() + i * c;
    double mean = 0;
    for (std::size_t j = 0; j < c; ++j) mean += row[j];
    mean /= static_cast<double>(c);
    double var = 0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(c);
    // zero-variance rows normalize to exactly zero
    const double is = var > 0 ? 1.0 / std::sqrt(var + eps) : 0.0;
    (*inv_std)[i] = static_cast<T>(is);
    for (std::size_t j = 0; j < c; ++j) {
      const T h = static_cast<T>((row[j] - mean) * is);
      (*xhat)[i * c + j] = h;
      out[i * c + j] = h * gv[j] + bv[j];
    }
  }
  const std::size_t xid = x.id, gid = gain.id, bid = bias.id;
  return x.tape->Record(
      "layer_norm", std::move(out), {x, gain, bias},
      [xid, gid, bid, n, c, xhat, inv_std](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
        const auto& gv = tape.value(BasicVar<T>{&tape, gid});
        if (tape.NeedsGrad(gid)) {
          auto& dg = tape.MutableGrad(gid);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) dg[j] += g[i * c + j] * (*xhat)[i * c + j];
        }
        if (tape.NeedsGrad(bid)) {
          auto& db = tape.MutableGrad(bid);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) db[j] += g[i * c + j];
        }
        if (!tape.NeedsGrad(xid)) return;
        auto& dx = tape.MutableGrad(xid);
        for (std::size_t i = 0; i < n; ++i) {
          const T is = (*inv_std)[i];
          if (is == T(0)) continue;
          double sum_dh = 0, sum_dh_h = 0;
          for (std::size_t j = 0; j < c; ++j) {
            const double dh = g[i * c + j] * gv[j];
            sum_dh += dh;
            sum_dh_h += dh * (*xhat)[i * c + j];
          }
          const double mean_dh = sum_dh / c, mean_dh_h = sum_dh_h / c;
          for (std::size_t j = 0; j < c; ++j) {
            const double dh = g[i * c + j] * gv[j];
            dx[i * c + j] += static_cast<T>(is * (dh - mean_dh - (*xhat)[i * c + j] * mean_dh_h));
          }
        }
      });
}

template <typename T>
BasicVar<T> SoftmaxLastDim(BasicVar<T> x) {
  const auto& xv = x.value();
  const std::size_t c = xv.shape().empty() ? 0 : xv.shape().back();
  if (c == 0) throw ShapeError("softmax: last dim must be >= 1");
  const std::size_t n = xv.size() / c;
  TensorOf<T> out(xv.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = xv.storage().data() + i * c;
    T* o = out.storage().data() + i * c;
    const T mx = *std::max_element(row, row + c);
    T sum = 0;
    for (std::size_t j = 0; j < c; ++j) {
      o[j] = std::exp(row[j] - mx);
      sum += o[j];
    }
    for (std::size_t j = 0; j < c; ++j) o[j] /= sum;
  }
  const std::size_t xid = x.id;
  return x.tape->Record("softmax", std::move(out), {x},
                        [xid, n, c](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>& y) {
                          if (!tape.NeedsGrad(xid)) return;
                          auto& dx = tape.MutableGrad(xid);
                          for (std::size_t i = 0; i < n; ++i) {
                            T dot = 0;
                            for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * y[i * c + j];
                            for (std::size_t j = 0; j < c; ++j) dx[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
                          }
                        });
}

template <typename T>
BasicVar<T> Gelu(BasicVar<T> x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return Unary<T>(
      "gelu", x,
      [](T v) { return static_cast<T>(0.5 * v * (1.0 + std::erf(v * kInvSqrt2))); },
      [](T v) {
        const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * double(v) * v);
        return static_cast<T>(cdf + v * pdf);
      });
}

template <typename T>
BasicVar<T> Softplus(BasicVar<T> x) {
  return Unary<T>(
      "softplus", x,
      [](T v) { return v > T(20) ? v : static_cast<T>(std::log1p(std::exp(double(v)))); },
      [](T v) { return static_cast<T>(1.0 / (1.0 + std::exp(-double(v)))); });
}

template <typename T>
BasicVar<T> Square(BasicVar<T> x) {
  return Unary<T>("square", x, [](T v) { return v * v; }, [](T v) { return T(2) * v; });
}

template <typename T>
BasicVar<T> Abs(BasicVar<T> x) {
  return Unary<T>(
      "abs", x, [](T v) { return std::abs(v); },
      [](T v) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
BasicVar<T> Sum(BasicVar<T> x) {
  const auto& xv = x.value();
  double acc = 0;
  for (T v : xv.storage()) acc += v;
  const std::size_t xid = x.id;
  return x.tape->Record("sum", TensorOf<T>::Scalar(static_cast<T>(acc)), {x},
                        [xid](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
                          if (!tape.NeedsGrad(xid)) return;
                          auto& dx = tape.MutableGrad(xid);
                          for (auto& v : dx.storage()) v += g[0];
                        });
}

template <typename T>
BasicVar<T> Mean(BasicVar<T> x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw ShapeError("mean of empty tensor");
  return Scale(Sum(x), 1.0 / static_cast<double>(n));
}

template <typename T>
BasicVar<T> SumLastDim(BasicVar<T> x) {
  const auto& xv = x.value();
  RequireRank2(xv.shape(), "sum_last_dim");
  const std::size_t n = xv.dim(0), c = xv.dim(1);
  TensorOf<T> out({n});
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < c; ++j) acc += xv[i * c + j];
    out[i] = static_cast<T>(acc);
  }
  const std::size_t xid = x.id;
  return x.tape->Record("sum_last_dim", std::move(out), {x},
                        [xid, n, c](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
                          if (!tape.NeedsGrad(xid)) return;
                          auto& dx = tape.MutableGrad(xid);
                          for (std::size_t i = 0; i < n; ++i)
                            for (std::size_t j = 0; j < c; ++j) dx[i * c + j] += g[i];
                        });
}

template <typename T>
BasicVar<T> MeanLastDim(BasicVar<T> x) {
  const auto& s = x.shape();
  RequireRank2(s, "mean_last_dim");
  return Scale(SumLastDim(x), 1.0 / static_cast<double>(s[1]));
}

template <typename T>
BasicVar<T> Reshape(BasicVar<T> x, Shape shape) {
  if (NumElements(shape) != x.value().size()) {
    throw ShapeError("reshape: " + ShapeToString(x.shape()) + " -> " + ShapeToString(shape));
  }
  const std::size_t xid = x.id;
  return x.tape->Record("reshape", x.value().Reshaped(std::move(shape)), {x},
                        [xid](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
                          Accumulate(tape, xid, g);
                        });
}

template <typename T>
BasicVar<T> SliceCols(BasicVar<T> x, std::size_t start, std::size_t count) {
  const auto& xv = x.value();
  RequireRank2(xv.shape(), "slice_cols");
  const std::size_t n = xv.dim(0), c = xv.dim(1);
  if (start + count > c) throw ShapeError("slice_cols: range exceeds column count");
  TensorOf<T> out({n, count});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = xv[i * c + start + j];
  const std::size_t xid = x.id;
  return x.tape->Record("slice_cols", std::move(out), {x},
                        [xid, n, c, start, count](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
                          if (!tape.NeedsGrad(xid)) return;
                          auto& dx = tape.MutableGrad(xid);
                          for (std::size_t i = 0; i < n; ++i)
                            for (std::size_t j = 0; j < count; ++j) dx[i * c + start + j] += g[i * count + j];
                        });
}

template <typename T>
BasicVar<T> ConcatCols(std::span<const BasicVar<T>> xs) {
  if (xs.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t n = xs[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& x : xs) {
    RequireRank2(x.shape(), "concat_cols");
    if (x.value().dim(0) != n) throw ShapeError("concat_cols: row counts differ");
    widths.push_back(x.value().dim(1));
    total += widths.back();
  }
  TensorOf<T> out({n, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto& xv = xs[k].value();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j) out[i * total + offset + j] = xv[i * widths[k] + j];
    offset += widths[k];
  }
  std::vector<BasicVar<T>> inputs(xs.begin(), xs.end());
  std::vector<std::size_t> ids;
  for (const auto& x : xs) ids.push_back(x.id);
  return xs[0].tape->Record(
      "concat_cols", std::move(out), inputs,
      [ids, widths, n, total](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (tape.NeedsGrad(ids[k])) {
            auto& dx = tape.MutableGrad(ids[k]);
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < widths[k]; ++j) dx[i * widths[k] + j] += g[i * total + offset + j];
          }
          offset += widths[k];
        }
      });
}

template <typename T>
BasicVar<T> GatherRows(BasicVar<T> x, std::vector<std::uint32_t> rows) {
  const auto& xv = x.value();
  RequireRank2(xv.shape(), "gather_rows");
  const std::size_t n = xv.dim(0), c = xv.dim(1);
  TensorOf<T> out({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n) throw ShapeError("gather_rows: row index out of range");
    std::copy_n(xv.storage().data() + rows[i] * c, c, out.storage().data() + i * c);
  }
  const std::size_t xid = x.id;
  return x.tape->Record("gather_rows", std::move(out), {x},
                        [xid, c, rows = std::move(rows)](BasicTape<T>& tape, const TensorOf<T>& g, const TensorOf<T>&) {
                          if (!tape.NeedsGrad(xid)) return;
                          auto& dx = tape.MutableGrad(xid);
                          for (std::size_t i = 0; i < rows.size(); ++i)
                            for (std::size_t j = 0; j < c; ++j) dx[rows[i] * c + j] += g[i * c + j];
                        });
}

#define ESCOUNTS_INSTANTIATE_OPS(T)                                                        \
  template BasicVar<T> MatMul<T>(BasicVar<T>, BasicVar<T>);                                \
  template BasicVar<T> Transpose<T>(BasicVar<T>);                                          \
  template BasicVar<T> Add<T>(BasicVar<T>, BasicVar<T>);                                   \
  template BasicVar<T> Sub<T>(BasicVar<T>, BasicVar<T>);                                   \
  template BasicVar<T> Mul<T>(BasicVar<T>, BasicVar<T>);                                   \
  template BasicVar<T> Scale<T>(BasicVar<T>, double);                                      \
  template BasicVar<T> AddScalar<T>(BasicVar<T>, double);                                  \
  template BasicVar<T> AddRowBroadcast<T>(BasicVar<T>, BasicVar<T>);                       \
  template BasicVar<T> Linear<T>(BasicVar<T>, BasicVar<T>, BasicVar<T>);                   \
  template BasicVar<T> MeanOf<T>(std::span<const BasicVar<T>>);                            \
  template BasicVar<T> LayerNorm<T>(BasicVar<T>, BasicVar<T>, BasicVar<T>, double);        \
  template BasicVar<T> SoftmaxLastDim<T>(BasicVar<T>);                                     \
  template BasicVar<T> Gelu<T>(BasicVar<T>);                                               \
  template BasicVar<T> Softplus<T>(BasicVar<T>);                                           \
  template BasicVar<T> Square<T>(BasicVar<T>);                                             \
  template BasicVar<T> Abs<T>(BasicVar<T>);                                                \
  template BasicVar<T> Sum<T>(BasicVar<T>);                                                \
  template BasicVar<T> Mean<T>(BasicVar<T>);                                               \
  template BasicVar<T> SumLastDim<T>(BasicVar<T>);                                         \
  template BasicVar<T> MeanLastDim<T>(BasicVar<T>);                                        \
  template BasicVar<T> Reshape<T>(BasicVar<T>, Shape);                                     \
  template BasicVar<T> SliceCols<T>(BasicVar<T>, std::size_t, std::size_t);                \
  template BasicVar<T> ConcatCols<T>(std::span<const BasicVar<T>>);                        \
  template BasicVar<T> GatherRows<T>(BasicVar<T>, std::vector<std::uint32_t>);

ESCOUNTS_INSTANTIATE_OPS(float)
ESCOUNTS_INSTANTIATE_OPS(double)

#undef ESCOUNTS_INSTANTIATE_OPS

}  // namespace escounts
