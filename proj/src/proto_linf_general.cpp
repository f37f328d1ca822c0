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

#include "mpstat/proto_linf_general.hpp"

#include <algorithm>

#include "mpstat/sketch.hpp"
#include "proto_util.hpp"

namespace mpstat {

void GeneralLinfParams::validate(Index n) const {
  if (!(kappa >= 1.0 && kappa <= static_cast<double>(n))) {
    throw InvalidInput("kappa must lie in [1, n]");
  }
  if (means == 0 || medians == 0) throw InvalidInput("means and medians must be positive");
}

EstimateReport run_linf_general(const SparseIntMatrix& a, const SparseIntMatrix& b,
                                const GeneralLinfParams& params,
                                ProtocolSession& session, GeneralLinfTrace* trace) {
  detail::require_compatible(a, b);
  params.validate(std::max({a.rows(), a.cols(), b.cols()}));
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const Index inner = a.cols();

  // Bob only needs the block layout, which depends on shape and kappa, so S
  // comes from Alice's own randomness.
  {
    const BlockedL2Sketch s(a.rows(), params.kappa, alice.rng().next(), params.means,
                            params.medians);
    const SparseIntMatrix at = a.transpose();
    const std::size_t rows = s.rows();
    // Row-major rows x inner.
    std::vector<std::int64_t> sa(rows * static_cast<std::size_t>(inner), 0);
    for (Index k = 0; k < inner; ++k) {
      const auto col = at.row(k);
      for (std::size_t t = 0; t < col.size(); ++t) {
        const Index i = col.cols[t];
        const std::size_t first = static_cast<std::size_t>(i / s.block_size()) * s.rows_per_block();
        for (std::size_t r = first; r < first + s.rows_per_block(); ++r) {
          sa[r * static_cast<std::size_t>(inner) + static_cast<std::size_t>(k)] +=
              s.sign(r, i) * col.values[t];
        }
      }
    }
    WireWriter w;
    w.sints_minimal(sa);
    alice.send(std::move(w), "linfg.sketch");
  }

  const BlockedL2Sketch layout(a.rows(), params.kappa, 0, params.means, params.medians);
  const std::size_t rows = layout.rows();
  WireReader in = bob.receive();
  const std::vector<std::int64_t> sa = in.sints_minimal(rows * static_cast<std::size_t>(inner));
  const SparseIntMatrix bt = b.transpose();
  std::vector<Wide> acc(rows);
  std::vector<Value> y(rows);
  std::vector<double> est(static_cast<std::size_t>(b.cols()), 0.0);
  for (Index j = 0; j < b.cols(); ++j) {
    const auto col = bt.row(j);
    if (col.empty()) continue;
    std::fill(acc.begin(), acc.end(), 0);
    for (std::size_t t = 0; t < col.size(); ++t) {
      const auto k = static_cast<std::size_t>(col.cols[t]);
      for (std::size_t r = 0; r < rows; ++r) {
        acc[r] += static_cast<Wide>(sa[r * static_cast<std::size_t>(inner) + k]) * col.values[t];
      }
    }
    for (std::size_t r = 0; r < rows; ++r) {
      if (acc[r] > INT64_MAX || acc[r] < INT64_MIN) {
        throw InvalidInput("sketch of the product overflows int64");
      }
      y[r] = static_cast<Value>(acc[r]);
    }
    est[static_cast<std::size_t>(j)] = layout.linf_estimate(y);
  }
  const double out = est.empty() ? 0.0 : *std::max_element(est.begin(), est.end());
  if (trace != nullptr) {
    trace->sketch_rows = rows;
    trace->column_estimates = std::move(est);
  }
  return session.finish(Party::kBob, out);
}

}  // namespace mpstat
