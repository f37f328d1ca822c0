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

#include "proto_util.hpp"

namespace mpstat::detail {

std::size_t draw_weighted(const std::vector<Wide>& weight, Rng& rng) {
  Wide total = 0;
  for (Wide w : weight) total += w;
  if (total <= 0) throw InvalidInput("draw_weighted: no positive weight");
  if (total <= static_cast<Wide>(UINT64_MAX)) {
    Wide u = rng.below(static_cast<std::uint64_t>(total));
    for (std::size_t k = 0; k < weight.size(); ++k) {
      if (u < weight[k]) return k;
      u -= weight[k];
    }
  } else {
    double u = rng.uniform() * static_cast<double>(total);
    for (std::size_t k = 0; k < weight.size(); ++k) {
      const auto w = static_cast<double>(weight[k]);
      if (u < w) return k;
      u -= w;
    }
  }
  // Floating-point spill on the last step.
  for (std::size_t k = weight.size(); k-- > 0;) {
    if (weight[k] > 0) return k;
  }
  return 0;
}

void row_times(const SparseIntMatrix& a, Index i, const SparseIntMatrix& b,
               std::vector<Index>& cols, std::vector<Value>& vals) {
  cols.clear();
  vals.clear();
  const auto ra = a.row(i);
  if (ra.empty()) return;
  std::vector<Wide> acc(static_cast<std::size_t>(b.cols()), 0);
  std::vector<Index> touched;
  for (std::size_t t = 0; t < ra.size(); ++t) {
    const auto rb = b.row(ra.cols[t]);
    for (std::size_t s = 0; s < rb.size(); ++s) {
      auto& slot = acc[static_cast<std::size_t>(rb.cols[s])];
      if (slot == 0) touched.push_back(rb.cols[s]);
      slot += static_cast<Wide>(ra.values[t]) * rb.values[s];
    }
  }
  std::sort(touched.begin(), touched.end());
  for (Index j : touched) {
    const Wide v = acc[static_cast<std::size_t>(j)];
    if (v == 0) continue;
    if (v > INT64_MAX) throw InvalidInput("product entry overflows int64");
    cols.push_back(j);
    vals.push_back(static_cast<Value>(v));
  }
}

}  // namespace mpstat::detail
