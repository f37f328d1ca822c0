/*
 * Copyright 2026 The mpstat Authors.
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

// Helpers shared by the protocol translation units. Not installed.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mpstat/channel.hpp"
#include "mpstat/matrix.hpp"
#include "mpstat/sketch.hpp"

namespace mpstat::detail {

inline void require_compatible(const SparseIntMatrix& a,
                               const SparseIntMatrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidInput("inner dimensions differ: A is " +
                       std::to_string(a.rows()) + "x" +
                       std::to_string(a.cols()) + ", B is " +
                       std::to_string(b.rows()) + "x" +
                       std::to_string(b.cols()));
  }
}

inline void require_binary(const SparseIntMatrix& m, const char* who) {
  if (!m.is_binary()) throw InvalidInput(std::string(who) + " must be binary");
}

// Bits for one index in [0, n): ceil(log2 n), at least 1.
inline unsigned index_width(Index n) {
  if (n <= 2) return 1;
  return static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(n - 1)));
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

inline double log_n_of(const SparseIntMatrix& a, const SparseIntMatrix& b) {
  const Index n = std::max({a.rows(), a.cols(), b.cols(), Index{2}});
  return std::log(static_cast<double>(n));
}

inline std::vector<std::uint64_t> as_unsigned(const std::vector<Value>& v) {
  return {v.begin(), v.end()};
}

// Draws an index with probability weight[k] / sum(weight) from exact
// integer weights.
std::size_t draw_weighted(const std::vector<Wide>& weight, Rng& rng);

// Sparse row of A_i * B as (cols, values), columns ascending.
void row_times(const SparseIntMatrix& a, Index i, const SparseIntMatrix& b,
               std::vector<Index>& cols, std::vector<Value>& vals);

}  // namespace mpstat::detail
