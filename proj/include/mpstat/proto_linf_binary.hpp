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
#include <span>
#include <vector>

#include "mpstat/channel.hpp"
#include "mpstat/matrix.hpp"

namespace mpstat {

// ---- index exchange ------------------------------------------------------

// C_A + C_B = A_sub * B. For each inner item j the side with the shorter list
// (Alice on ties) ships it; the receiver then knows the whole rank-one term.
struct AdditiveSplit {
  SparseIntMatrix c_a;  // held by Alice
  SparseIntMatrix c_b;  // held by Bob
  // Sender of list j; only meaningful when both counts are positive.
  std::vector<Party> owner;
};

Party list_sender(Index u, Index v);

// Building blocks shared with the heavy-hitter protocols. A party's lists are
// the rows of `by_item`: Alice passes A^T, Bob passes B. u and v are the list
// sizes at Alice and Bob. Lists go out as fixed-width indices (no count, the
// receiver knows it) followed, with values, by one varint per entry.
void write_lists(WireWriter& w, Party self, const SparseIntMatrix& by_item,
                 std::span<const Index> u, std::span<const Index> v,
                 bool with_values);

class SplitAccumulator {
 public:
  SplitAccumulator(Index rows, Index cols) : rows_(rows), cols_(cols) {}
  void add(Index i, Index j, Value v);
  SparseIntMatrix build() const;

 private:
  Index rows_;
  Index cols_;
  std::vector<Triplet> entries_;
};

// Reads the other party's lists and adds every rank-one term that `self` can
// now form into `acc` (C is rows(A) x cols(B)).
void read_lists(WireReader& r, Party self, const SparseIntMatrix& by_item,
                std::span<const Index> u, std::span<const Index> v,
                Index other_dim, bool with_values, SplitAccumulator& acc);

// Standalone three-message run: Alice's counts, Bob's counts and lists,
// Alice's lists. Does not finish the session. A_sub and B must be binary
// unless with_values.
AdditiveSplit index_exchange(const SparseIntMatrix& a_sub,
                             const SparseIntMatrix& b, ProtocolSession& session,
                             bool with_values = false);

// ---- max entry, binary inputs ------------------------------------------

struct LinfParams {
  double eps = 0.5;
  double c_gamma = 8.0;  // gamma = c_gamma ln n / eps^2
  void validate() const;
};

struct LinfTrace {
  std::vector<double> level_probs;   // p_l for l = 0..L
  std::vector<double> level_l1;      // ||C^l||_1 as computed by Bob
  double threshold = 0.0;
  std::int64_t chosen_level = 0;
  SparseIntMatrix sampled_a;  // A^{l*}
  AdditiveSplit split;
};

// Three rounds. Output max{||C_A||_inf, ||C_B||_inf} / p_{l*} at Bob.
EstimateReport run_linf_2eps(const SparseIntMatrix& a, const SparseIntMatrix& b,
                             const LinfParams& params, ProtocolSession& session,
                             LinfTrace* trace = nullptr);

struct UniverseSampleParams {
  double kappa = 4.0;
  double c_alpha = 8.0;  // alpha = c_alpha ln n, q = min(alpha / kappa, 1)
  void validate(Index n) const;
};

struct KappaTrace {
  double q = 1.0;
  std::vector<Index> kept_columns;
  bool d_zero = false;
  LinfTrace levels;
};

// Universe sampling then the level scheme with p_l = 2^-l; one round when
// the sampled product is zero, three otherwise.
EstimateReport run_linf_kappa(const SparseIntMatrix& a, const SparseIntMatrix& b,
                              const UniverseSampleParams& params,
                              ProtocolSession& session, KappaTrace* trace = nullptr);

}  // namespace mpstat
