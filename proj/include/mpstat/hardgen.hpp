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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpstat/matrix.hpp"

namespace mpstat {

// Planted ground truth and generation parameters of an instance. Numbers go
// in `params`, notes about rounding or clamping in `notes`.
struct InstanceMeta {
  std::string family;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
  std::map<std::string, std::string> notes;
  std::optional<double> planted_linf;
  std::optional<double> planted_l1;
  std::optional<int> planted_sum;
  std::optional<bool> intersecting;
  std::vector<EntryPos> planted_pairs;
};

struct HardInstance {
  SparseIntMatrix a;
  SparseIntMatrix b;
  InstanceMeta meta;
};

// One JSON object per line.
void write_meta_jsonl(std::ostream& out, const InstanceMeta& meta);
InstanceMeta read_meta_jsonl(const std::string& line);
// Writes <stem>.A.txt, <stem>.B.txt and appends to <stem>.meta.jsonl.
void save_instance(const std::string& stem, const HardInstance& inst);

// ---- set disjointness embedding ---------------------------------------------

// A = [[A', I], [0, 0]], B = [[I, 0], [B', 0]] with A', B' the (n/2)x(n/2)
// bit grids of x and y, so AB = [[A' + B', 0], [0, 0]].
struct DisjEmbedding {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> y;
  SparseIntMatrix a;
  SparseIntMatrix b;
  bool intersecting = false;
};

DisjEmbedding gen_disj_embedding(const std::vector<std::uint8_t>& x,
                                 const std::vector<std::uint8_t>& y);

// Same blocks with entries in [0, kappa]; ||AB||_inf = max_i (x_i + y_i).
HardInstance gen_gapinf_embedding(const std::vector<Value>& x,
                                  const std::vector<Value>& y, Value kappa);

// ---- SUM of DISJ instances ----------------------------------------------

struct SumParams {
  Index n = 128;
  Index k = 0;          // 0 selects round(1 / (4 kappa beta^2)), at least 1
  double kappa = 4.0;
  double beta = 0.0;    // 0 selects min(sqrt(50 ln n / n), 1)
};

struct SumInstance {
  Index n = 0;
  Index k = 0;
  Index blocks = 0;     // ceil(n / k) copies of the k-wide block
  double beta = 0.0;
  std::vector<std::vector<std::uint8_t>> u;  // n vectors of k bits
  std::vector<std::vector<std::uint8_t>> v;
  Index special_d = 0;  // D
  Index special_m = 0;  // M
  int planted_sum = 0;
  SparseIntMatrix a;    // n x (blocks k), row i repeats U_i
  SparseIntMatrix b;    // (blocks k) x n, column j repeats V_j
  InstanceMeta meta;
};

double sum_default_beta(Index n);
// Number of i with U_i and V_i sharing a coordinate.
int sum_of_disj(const std::vector<std::vector<std::uint8_t>>& u,
                const std::vector<std::vector<std::uint8_t>>& v);

SumInstance gen_sum_instance(const SumParams& params, std::uint64_t seed);
SumInstance gen_sum_instance(Index n, Index k, std::uint64_t seed);

// ---- planted and random families ----------------------------------------

// Binary; every entry nonzero with probability density.
HardInstance gen_random_density(Index n, double density, Value max_value,
                                std::uint64_t seed);

// Binary; row r of A and column r of B are all ones over random noise of
// the given density, so ||AB||_inf = n at (r, r).
HardInstance gen_planted_max(Index n, double density, std::uint64_t seed);

// Integer; one entry of value m at a random (r, c) through a private item,
// noise entries in [1, noise_max] elsewhere. m is raised to exceed every
// possible noise entry, so ||AB||_inf = m.
HardInstance gen_planted_max_integer(Index n, double density, Value noise_max,
                                     Value m, std::uint64_t seed);

// Binary; a random row of A and column of B share `overlap` private items;
// noise of the given density avoids that row, column and those items, so
// C_rc = overlap exactly.
HardInstance gen_planted_hh_binary(Index n, Index overlap, double density,
                                   std::uint64_t seed);

// Integer; entry t equals about fraction[t] of ||AB||_1, each through a
// private item, over unit noise of the given density. The fractions must sum
// below 1.
HardInstance gen_planted_hh_integer(Index n, const std::vector<double>& fraction,
                                    double density, std::uint64_t seed);

}  // namespace mpstat
