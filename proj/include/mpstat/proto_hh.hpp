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

#include <cmath>
#include <cstdint>
#include <vector>

#include "mpstat/channel.hpp"
#include "mpstat/matrix.hpp"
#include "mpstat/proto_linf_binary.hpp"

namespace mpstat {

// ---- integer inputs --------------------------------------------------------

struct HHGeneralParams {
  double phi = 0.5;
  double eps = 0.2;
  double p = 1.0;
  double c = 8.0;       // rate = min(8 c ln n (phi/eps)^2 / (phi N)^(1/p), 1)
  int norm_boost = 3;   // repetitions of the l_p estimate when p != 1
  double norm_c_rho = 8.0;
  double norm_sketch_c = 6.0;

  void validate() const;
  // Accuracy requested from the l_p estimate: eps / (4 phi).
  double norm_accuracy() const { return eps / (4.0 * phi); }
  // Unit thinning rate for N = ||C||_p^p, and beta = rate^(1/p). For p = 1
  // this is min(c ln n / ((eps/phi)^2 (phi/8) N), 1).
  double rate(double norm_pow, Index n) const;
  double beta(double norm_pow, Index n) const {
    return std::pow(rate(norm_pow, n), 1.0 / p);
  }
  // Linear-scale thresholds on C^beta entries (see run_hh_general).
  double alice_threshold(double norm_pow, double rate) const;
  double output_threshold(double norm_pow, double rate) const;
};

struct HHGeneralTrace {
  double norm_pow = 0.0;  // ||C||_p^p as used by both parties
  double beta = 1.0;
  double rate = 1.0;      // beta^p
  SparseIntMatrix thinned_a;
  AdditiveSplit split;
  std::vector<Triplet> shipped;  // C'_A
  double alice_threshold = 0.0;
  double output_threshold = 0.0;
};

// Each unit of A survives with probability beta^p (entry v becomes
// Binomial(v, beta^p)), so E[A^beta B] = beta^p C.
SparseIntMatrix thin_units(const SparseIntMatrix& a, double rate, Rng& rng);

// p = 1: Bob's row sums, Alice's ||C||_1 with her counts, index exchange,
// then Alice's large C_A entries; 4 rounds. Other p: the l_p estimate
// first, then Bob's estimate back and the same tail; 6 rounds. Bob outputs
// the entries of C'_A + C_B at or above the output threshold.
EstimateReport run_hh_general(const SparseIntMatrix& a, const SparseIntMatrix& b,
                              const HHGeneralParams& params,
                              ProtocolSession& session,
                              HHGeneralTrace* trace = nullptr);

// ---- binary inputs -------------------------------------------------------

struct HHBinaryParams {
  double phi = 0.5;
  double eps = 0.2;
  double p = 1.0;
  double c = 8.0;           // alpha = (c ln n)^(1/p)
  double c_bypass = 100.0;  // no column sampling below c_bypass phi ln n / eps^2
  double c_verify = 8.0;    // verify_samples = ceil(c_verify (phi/eps)^2 ln n)
  double candidate_divisor = 20.0;
  int norm_boost = 3;
  double norm_c_rho = 8.0;
  double norm_sketch_c = 6.0;

  void validate() const;
  double norm_accuracy() const;
  double beta(double norm_pow, Index n) const;
  bool bypass(double norm_pow, Index n) const;
  double verify_threshold(double norm_pow, double beta) const;  // p-th power scale
  std::size_t verify_samples(Index n) const;
  // On the success event at most this many entries of one side reach the
  // verify threshold.
  double candidate_bound() const { return 2.0 * candidate_divisor / phi; }
};

struct HHBinaryTrace {
  double norm_pow = 0.0;
  double beta = 1.0;
  bool bypassed = false;
  std::vector<Index> kept_columns;
  AdditiveSplit split;
  std::vector<EntryPos> candidates;      // in wire order
  std::vector<double> candidate_estimates;
  std::vector<Index> sampled_coords;     // empty when whole rows were sent
};

// Rough l_p estimate (2 rounds), Bob's estimate and counts, Alice's counts
// and lists, Bob's lists and candidates, Alice's candidates and sampled row
// bits; Bob verifies and outputs. 6 rounds.
EstimateReport run_hh_binary(const SparseIntMatrix& a, const SparseIntMatrix& b,
                             const HHBinaryParams& params, ProtocolSession& session,
                             HHBinaryTrace* trace = nullptr);

}  // namespace mpstat
