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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mpstat/channel.hpp"
#include "mpstat/matrix.hpp"

namespace mpstat {

__extension__ typedef __int128 Wide;

// Writes/reads a signed 128-bit integer as an 8-bit width header followed by
// the zigzag magnitude bits.
void write_wide(WireWriter& w, Wide v);
Wide read_wide(WireReader& r);

// Median of |X| for a standard symmetric p-stable X (characteristic function
// exp(-|t|^p)), computed by quadrature. p in (0, 2].
double stable_abs_median(double p);

// Draws one standard symmetric p-stable variate from two uniforms
// (Chambers-Mallows-Stuck). u1 in [0,1), u2 in (0,1].
double stable_variate(double p, double u1, double u2);

// ---- l_p sketch ------------------------------------------------------------

struct LpSketchSpec {
  double p = 2.0;
  double eps = 0.25;
  double delta = 0.05;
  Index input_dim = 1;
  std::uint64_t seed = 0;
  double c = 6.0;  // sketch_rows = c * ceil(1/eps^2) * ceil(ln(1/delta))

  // c * ceil(1/eps^2): per-group size (p = 2), buckets per level (p = 0).
  std::size_t width() const;
  // ceil(ln(1/delta)): median groups (p = 2) or repetitions (p = 0).
  std::size_t groups() const;
  // Subsampling levels for p = 0.
  std::size_t levels() const;
};

// Sketch coordinates. For p in (0,2) each coordinate is in fixed point with
// LpSketch::kFracBits fractional bits; otherwise coordinates are integers.
struct LpSketchVector {
  std::vector<Wide> coords;

  LpSketchVector& operator+=(const LpSketchVector& o);
  // this += scale * o
  void add_scaled(const LpSketchVector& o, Value scale);
  friend bool operator==(const LpSketchVector&, const LpSketchVector&) = default;
};

// Linear sketch S x whose estimate approximates ||x||_p^p (the nonzero count
// for p = 0).
//  - p = 2: random signs, median of means of y^2.
//  - p in (0,2): p-stable entries, (median |y| / median_p)^p.
//  - p = 0: nested geometric levels, each a row of `width` hash buckets with
//    random positive weights; occupancy count inverted at the lowest level
//    whose load is small enough.
class LpSketch {
 public:
  static constexpr int kFracBits = 24;
  static constexpr double kStableClamp = 536870912.0;  // 2^29

  // With materialize = false only estimate/encode/decode are usable; that is
  // all a party holding sketches (but not inputs) needs.
  explicit LpSketch(LpSketchSpec spec, bool materialize = true);

  const LpSketchSpec& spec() const { return spec_; }
  std::size_t rows() const { return rows_; }
  bool integer_coords() const { return kind_ != Kind::kStable; }

  LpSketchVector zero() const;
  LpSketchVector apply(std::span<const Value> x) const;
  LpSketchVector apply_sparse(std::span<const Index> idx,
                              std::span<const Value> vals) const;
  double estimate(const LpSketchVector& sk) const;

  // Canonical wire form. Integer sketches pick the shorter of a dense
  // minimal-width block and a sparse (index set, zigzag varint) block behind
  // a 1-bit flag; stable sketches go out as a QuantizedVector.
  void encode(WireWriter& w, const LpSketchVector& sk) const;
  LpSketchVector decode(WireReader& r) const;
  // Round-trip through the wire quantization without a session.
  LpSketchVector quantize(const LpSketchVector& sk) const;

 private:
  enum class Kind { kSigns, kStable, kDistinct };

  void add_coordinate(LpSketchVector& sk, Index i, Value v) const;
  double estimate_signs(const std::vector<double>& y) const;
  double estimate_stable(const std::vector<double>& y) const;
  double estimate_distinct(const LpSketchVector& sk) const;

  LpSketchSpec spec_;
  Kind kind_;
  std::size_t rows_ = 0;
  double stable_median_ = 1.0;
  // Materialized S for p > 0, column-major rows_ x input_dim.
  std::vector<std::int64_t> matrix_;
};

std::size_t sketch_rows(const LpSketchSpec& spec);

// ---- l_0 sampler -------------------------------------------------------------

struct L0SamplerState {
  // One triple per (rep, level), rep-major.
  std::vector<Wide> a;            // sum x_i
  std::vector<Wide> b;            // sum i * x_i
  std::vector<std::uint64_t> f;   // sum x_i z^(i+1) mod 2^61 - 1

  void add_scaled(const L0SamplerState& o, Value scale);
  friend bool operator==(const L0SamplerState&, const L0SamplerState&) = default;
};

struct L0Empty {};
struct L0Fail {};
using L0Outcome = std::variant<Index, L0Empty, L0Fail>;

class L0Sampler {
 public:
  static constexpr std::uint64_t kPrime = (1ULL << 61) - 1;

  // reps = 0 selects max(4, 2 ceil(log2 n)).
  L0Sampler(Index input_dim, std::uint64_t seed, std::size_t reps = 0);

  Index input_dim() const { return dim_; }
  std::size_t levels() const { return levels_; }
  std::size_t reps() const { return reps_; }

  L0SamplerState zero() const;
  L0SamplerState apply(std::span<const Value> x) const;
  L0SamplerState apply_sparse(std::span<const Index> idx,
                              std::span<const Value> vals) const;
  // First repetition with a verified 1-sparse level (lowest such level).
  L0Outcome sample(const L0SamplerState& s) const;

  void encode(WireWriter& w, const L0SamplerState& s) const;
  L0SamplerState decode(WireReader& r) const;

 private:
  std::size_t level_of(std::size_t rep, Index i) const;

  Index dim_;
  std::uint64_t seed_;
  std::size_t levels_;
  std::size_t reps_;
  std::vector<std::uint64_t> z_;  // fingerprint base per rep
};

// ---- blocked l_2 sketch for l_inf ------------------------------------------

// Contiguous blocks of kappa^2 coordinates, each with its own random-sign
// sketch of means * medians rows.
class BlockedL2Sketch {
 public:
  BlockedL2Sketch(Index input_dim, double kappa, std::uint64_t seed,
                  std::size_t means = 4, std::size_t medians = 7);

  Index input_dim() const { return dim_; }
  Index block_size() const { return block_size_; }
  Index block_count() const { return block_count_; }
  std::size_t rows_per_block() const { return means_ * medians_; }
  std::size_t rows() const { return rows_per_block() * block_count_; }

  int sign(std::size_t row, Index i) const;
  // Row r touches only coordinates of block r / rows_per_block().
  Index block_of_row(std::size_t row) const {
    return static_cast<Index>(row / rows_per_block());
  }

  std::vector<Value> apply(std::span<const Value> x) const;
  // l_2^2 estimate of one block from its rows_per_block() coordinates.
  double block_l2sq(std::span<const Value> block_coords) const;
  // max over blocks of the l_2 estimate.
  double linf_estimate(std::span<const Value> sk) const;

 private:
  Index dim_;
  Index block_size_;
  Index block_count_;
  std::uint64_t seed_;
  std::size_t means_;
  std::size_t medians_;
};

}  // namespace mpstat
