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

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mpstat/channel.hpp"
#include "mpstat/matrix.hpp"
#include "mpstat/sketch.hpp"

namespace mpstat {

struct LpProtocolParams {
  double p = 1.0;
  double eps = 0.25;
  double c_rho = 8.0;     // rho = c_rho / eps
  double sketch_c = 6.0;  // row constant of the l_p sketch
  double delta = 0.05;    // per-row sketch failure probability
  int boost_reps = 1;     // odd; median of independent repetitions

  double beta() const;
  double rho() const { return c_rho / eps; }
  void validate() const;
};

inline constexpr std::int64_t kZeroRowLevel = std::numeric_limits<std::int64_t>::min();

struct RowGroup {
  std::int64_t level = 0;
  std::vector<Index> rows;
  double norm_estimate = 0.0;  // sum of row estimates in the group
  double prob = 1.0;           // wire-exact sampling probability
};

struct RowGroupTable {
  std::vector<RowGroup> groups;       // ascending level
  std::vector<std::int64_t> row_level;  // kZeroRowLevel for excluded rows

  const RowGroup* find(std::int64_t level) const;
};

// Level of a positive estimate: floor(log_{1+beta} est).
std::int64_t group_level(double estimate, double beta);

// Groups rows by level and sets p = min(1, rho/|G| * G~/C~), rounded up to
// the 32-bit wire grid.
RowGroupTable build_row_groups(std::span<const double> row_estimates,
                               double beta, double rho);

// Probabilities travel as q in [0, 2^32) meaning (q + 1) / 2^32.
std::uint32_t encode_prob(double p);
double decode_prob(std::uint32_t q);

// sum_{i in row} |(row A_i times B)_j|^p, computed exactly.
double row_product_lp(const SparseIntMatrix& a, Index i,
                      const SparseIntMatrix& b, double p);

// The sampling phase on its own: keep each row of group l with probability
// p_l and return sum (1/p_l) ||C_i||_p^p over kept rows.
double sampled_estimate(const SparseIntMatrix& a, const SparseIntMatrix& b,
                        const RowGroupTable& table, double p, Rng& rng);

// Observable internals of the last repetition, for tests and the harness.
struct LpRunTrace {
  std::vector<double> row_estimates;
  RowGroupTable table;
  std::vector<Index> sampled_rows;
  std::vector<double> repetition_estimates;
};

// Two rounds: Bob sends S B^T at accuracy sqrt(eps); Alice sends the row
// level codes, the probability table and the sampled rows of A.
EstimateReport run_lp_estimate(const SparseIntMatrix& a,
                               const SparseIntMatrix& b,
                               const LpProtocolParams& params,
                               ProtocolSession& session,
                               LpRunTrace* trace = nullptr);

// Same message flow without finishing the session; returns Bob's output.
double lp_estimate_rounds(const SparseIntMatrix& a, const SparseIntMatrix& b,
                          const LpProtocolParams& params,
                          ProtocolSession& session, LpRunTrace* trace = nullptr);

// One round: Bob sends S B^T at accuracy eps; Alice sums the row estimates.
EstimateReport run_lp_baseline(const SparseIntMatrix& a,
                               const SparseIntMatrix& b,
                               const LpProtocolParams& params,
                               ProtocolSession& session);

// One round: Alice sends her column sums, Bob outputs ||AB||_1 exactly.
EstimateReport run_l1_exact(const SparseIntMatrix& a, const SparseIntMatrix& b,
                            ProtocolSession& session);

// One round: column sums plus one row index per nonzero column drawn in
// proportion to the column entries. Bob returns (a, b) with witness j.
EstimateReport run_l1_sample(const SparseIntMatrix& a, const SparseIntMatrix& b,
                             ProtocolSession& session);

struct L0SampleParams {
  double eps = 0.25;
  double delta = 0.05;
  double sketch_c = 6.0;
  int max_retries = 3;  // extra sampler copies consulted after a FAIL
};

// One round: Alice sends per-column l_0 sketches and sampler states of A;
// Bob forms them for the columns of C through B, picks a column in
// proportion to its l_0 estimate, and samples inside it.
EstimateReport run_l0_sample_matrix(const SparseIntMatrix& a,
                                    const SparseIntMatrix& b,
                                    const L0SampleParams& params,
                                    ProtocolSession& session);

}  // namespace mpstat
