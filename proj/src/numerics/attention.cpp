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

#include <cmath>
#include <numeric>

#include "escounts/numerics/ops.hpp"

namespace escounts {

std::shared_ptr<const AttentionLayout> AttentionLayout::Dense(std::size_t num_queries, std::size_t num_keys) {
  auto layout = std::make_shared<AttentionLayout>();
  AttentionGroup g;
  g.queries.resize(num_queries);
  g.keys.resize(num_keys);
  std::iota(g.queries.begin(), g.queries.end(), 0u);
  std::iota(g.keys.begin(), g.keys.end(), 0u);
  layout->groups.push_back(std::move(g));
  return layout;
}

namespace {

// Copies rows[i], columns [col, col + width) of src (row stride `stride`) into dst.
template <typename T>
void GatherBlock(const T* src, std::size_t stride, const std::vector<std::uint32_t>& rows, std::size_t col,
                 std::size_t width, T* dst) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const T* s = src + rows[i] * stride + col;
    std::copy(s, s + width, dst + i * width);
  }
}

template <typename T>
void ScatterAddBlock(const T* src, std::size_t stride, const std::vector<std::uint32_t>& rows,
                     std::size_t col, std::size_t width, T* dst) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    T* d = dst + rows[i] * stride + col;
    const T* s = src + i * width;
    for (std::size_t j = 0; j < width; ++j) d[j] += s[j];
  }
}

}  // namespace

template <typename T>
BasicVar<T> Attention(BasicVar<T> q, BasicVar<T> k, BasicVar<T> v, std::size_t heads,
                      std::shared_ptr<const AttentionLayout> layout) {
  const auto& qv = q.value();
  const auto& kv = k.value();
  const auto& vv = v.value();
  if (qv.rank() != 2 || kv.rank() != 2 || vv.rank() != 2) throw ShapeError("attention: rank-2 inputs required");
  const std::size_t c = qv.dim(1);
  if (kv.dim(1) != c || vv.dim(1) != c) {
    throw ShapeError("attention: channel mismatch " + ShapeToString(qv.shape()) + " / " +
                     ShapeToString(kv.shape()) + " / " + ShapeToString(vv.shape()));
  }
  if (kv.dim(0) != vv.dim(0)) throw ShapeError("attention: keys and values differ in length");
  if (heads == 0 || c % heads != 0) throw ShapeError("attention: channels not divisible by heads");
  if (!layout) throw std::invalid_argument("attention: null layout");
  const std::size_t mq = qv.dim(0), mk = kv.dim(0);
  for (const auto& g : layout->groups) {
    for (auto r : g.queries)
      if (r >= mq) throw ShapeError("attention: query index out of range");
    for (auto r : g.keys)
      if (r >= mk) throw ShapeError("attention: key index out of range");
  }
  const std::size_t d = c / heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d)));

  // probabilities per (group, head), row-major [nq, nk]
  auto probs = std::make_shared<std::vector<std::vector<T>>>();
  probs->reserve(layout->groups.size() * heads);
  BasicTensor<T> out({mq, c});
  std::vector<T> qb, kb, vb, ob;
  for (const auto& g : layout->groups) {
    const std::size_t nq = g.queries.size(), nk = g.keys.size();
    for (std::size_t h = 0; h < heads; ++h) {
      std::vector<T> p(nq * nk);
      if (nq == 0 || nk == 0) {
        probs->push_back(std::move(p));
        continue;
      }
      qb.assign(nq * d, 0);
      kb.assign(nk * d, 0);
      vb.assign(nk * d, 0);
      ob.assign(nq * d, 0);
      GatherBlock(qv.storage().data(), c, g.queries, h * d, d, qb.data());
      GatherBlock(kv.storage().data(), c, g.keys, h * d, d, kb.data());
      GatherBlock(vv.storage().data(), c, g.keys, h * d, d, vb.data());
      for (std::size_t i = 0; i < nq; ++i) {
        T* row = p.data() + i * nk;
        const T* qi = qb.data() + i * d;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < nk; ++j) {
          const T* kj = kb.data() + j * d;
          T acc = 0;
          for (std::size_t t = 0; t < d; ++t) acc += qi[t] * kj[t];
          row[j] = acc * scale;
          mx = std::max(mx, row[j]);
        }
        T sum = 0;
        for (std::size_t j = 0; j < nk; ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += row[j];
        }
        const T inv = T(1) / sum;
        T* oi = ob.data() + i * d;
        for (std::size_t j = 0; j < nk; ++j) {
          row[j] *= inv;
          const T pj = row[j];
          const T* vj = vb.data() + j * d;
          for (std::size_t t = 0; t < d; ++t) oi[t] += pj * vj[t];
        }
      }
      for (std::size_t i = 0; i < nq; ++i) {
        std::copy_n(ob.data() + i * d, d, out.storage().data() + g.queries[i] * c + h * d);
      }
      probs->push_back(std::move(p));
    }
  }

  const std::size_t qid = q.id, kid = k.id, vid = v.id;
  return q.tape->Record(
      "attention", std::move(out), {q, k, v},
      [qid, kid, vid, heads, c, d, scale, layout, probs](BasicTape<T>& tape, const BasicTensor<T>& grad,
                                                          const BasicTensor<T>&) {
        const auto& qv = tape.value(BasicVar<T>{&tape, qid});
        const auto& kv = tape.value(BasicVar<T>{&tape, kid});
        const auto& vv = tape.value(BasicVar<T>{&tape, vid});
        const bool need_q = tape.NeedsGrad(qid), need_k = tape.NeedsGrad(kid), need_v = tape.NeedsGrad(vid);
        T* dq = need_q ? tape.MutableGrad(qid).storage().data() : nullptr;
        T* dk = need_k ? tape.MutableGrad(kid).storage().data() : nullptr;
        T* dv = need_v ? tape.MutableGrad(vid).storage().data() : nullptr;
        std::vector<T> qb, kb, vb, gob, ds, dqb, dkb, dvb;
        std::size_t slot = 0;
        for (const auto& g : layout->groups) {
          const std::size_t nq = g.queries.size(), nk = g.keys.size();
          for (std::size_t h = 0; h < heads; ++h, ++slot) {
            if (nq == 0 || nk == 0) continue;
            const std::vector<T>& p = (*probs)[slot];
            qb.assign(nq * d, 0);
            kb.assign(nk * d, 0);
            vb.assign(nk * d, 0);
            gob.assign(nq * d, 0);
            GatherBlock(qv.storage().data(), c, g.queries, h * d, d, qb.data());
            GatherBlock(kv.storage().data(), c, g.keys, h * d, d, kb.data());
            GatherBlock(vv.storage().data(), c, g.keys, h * d, d, vb.data());
            GatherBlock(grad.storage().data(), c, g.queries, h * d, d, gob.data());
            ds.assign(nq * nk, 0);
            dvb.assign(nk * d, 0);
            for (std::size_t i = 0; i < nq; ++i) {
              const T* go = gob.data() + i * d;
              const T* pi = p.data() + i * nk;
              T* dsi = ds.data() + i * nk;
              T dot = 0;
              for (std::size_t j = 0; j < nk; ++j) {
                const T* vj = vb.data() + j * d;
                T dp = 0;
                for (std::size_t t = 0; t < d; ++t) dp += go[t] * vj[t];
                dsi[j] = dp;
                dot += dp * pi[j];
                T* dvj = dvb.data() + j * d;
                for (std::size_t t = 0; t < d; ++t) dvj[t] += pi[j] * go[t];
              }
              for (std::size_t j = 0; j < nk; ++j) dsi[j] = pi[j] * (dsi[j] - dot) * scale;
            }
            if (dv) ScatterAddBlock(dvb.data(), c, g.keys, h * d, d, dv);
            if (dq) {
              dqb.assign(nq * d, 0);
              for (std::size_t i = 0; i < nq; ++i) {
                T* dqi = dqb.data() + i * d;
                for (std::size_t j = 0; j < nk; ++j) {
                  const T s = ds[i * nk + j];
                  const T* kj = kb.data() + j * d;
                  for (std::size_t t = 0; t < d; ++t) dqi[t] += s * kj[t];
                }
              }
              ScatterAddBlock(dqb.data(), c, g.queries, h * d, d, dq);
            }
            if (dk) {
              dkb.assign(nk * d, 0);
              for (std::size_t i = 0; i < nq; ++i) {
                const T* qi = qb.data() + i * d;
                for (std::size_t j = 0; j < nk; ++j) {
                  const T s = ds[i * nk + j];
                  T* dkj = dkb.data() + j * d;
                  for (std::size_t t = 0; t < d; ++t) dkj[t] += s * qi[t];
                }
              }
              ScatterAddBlock(dkb.data(), c, g.keys, h * d, d, dk);
            }
          }
        }
      });
}

template BasicVar<float> Attention<float>(BasicVar<float>, BasicVar<float>, BasicVar<float>, std::size_t,
                                          std::shared_ptr<const AttentionLayout>);
template BasicVar<double> Attention<double>(BasicVar<double>, BasicVar<double>, BasicVar<double>, std::size_t,
                                            std::shared_ptr<const AttentionLayout>);

}  // namespace escounts
