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

#include "mpstat/sketch.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

namespace mpstat {
namespace {

double exact_lp(const std::vector<Value>& x, double p) {
  double s = 0.0;
  for (Value v : x)
    if (v != 0) s += p == 0.0 ? 1.0 : std::pow(static_cast<double>(v), p);
  return s;
}

std::vector<Value> random_vector(Index n, double density, Value max, Rng& rng) {
  std::vector<Value> x(static_cast<std::size_t>(n), 0);
  for (auto& v : x)
    if (rng.bernoulli(density)) v = 1 + static_cast<Value>(rng.below(static_cast<std::uint64_t>(max)));
  return x;
}

LpSketchSpec spec_of(double p, double eps, Index n, std::uint64_t seed) {
  LpSketchSpec s;
  s.p = p;
  s.eps = eps;
  s.input_dim = n;
  s.seed = seed;
  return s;
}

TEST(LpSketch, RowCountFormula) {
  EXPECT_EQ(sketch_rows(spec_of(2.0, 0.25, 10, 0)), 6u * 16u * 3u);
  LpSketchSpec s = spec_of(1.0, 0.5, 10, 0);
  s.c = 1.0;
  s.delta = 0.5;
  EXPECT_EQ(sketch_rows(s), 4u);
  EXPECT_GE(sketch_rows(spec_of(1.0, 0.99, 1, 0)), 1u);
  EXPECT_EQ(LpSketch(spec_of(0.0, 0.25, 16, 1)).rows(),
            sketch_rows(spec_of(0.0, 0.25, 16, 1)));
}

TEST(LpSketch, RejectsBadSpecAndDimension) {
  EXPECT_THROW(LpSketch(spec_of(2.5, 0.25, 4, 0)), InvalidInput);
  EXPECT_THROW(LpSketch(spec_of(1.0, 0.0, 4, 0)), InvalidInput);
  const LpSketch sk(spec_of(1.0, 0.25, 4, 0));
  EXPECT_THROW(sk.apply(std::vector<Value>(5, 1)), InvalidInput);
}

TEST(LpSketch, ZeroVectorSketchesToZero) {
  for (double p : {0.0, 0.5, 1.0, 2.0}) {
    const LpSketch sk(spec_of(p, 0.25, 20, 3));
    const auto v = sk.apply(std::vector<Value>(20, 0));
    EXPECT_EQ(v, sk.zero());
    EXPECT_EQ(sk.estimate(v), 0.0);
  }
}

TEST(LpSketch, LinearityIsExact) {
  Rng rng(5);
  for (double p : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    const LpSketch sk(spec_of(p, 0.3, 40, 11));
    for (int t = 0; t < 10; ++t) {
      const auto x = random_vector(40, 0.3, 50, rng);
      const auto y = random_vector(40, 0.3, 50, rng);
      std::vector<Value> xy(40);
      for (std::size_t i = 0; i < 40; ++i) xy[i] = x[i] + y[i];
      auto sum = sk.apply(x);
      sum += sk.apply(y);
      EXPECT_EQ(sum, sk.apply(xy));
      auto scaled = sk.apply(x);
      scaled.add_scaled(sk.apply(y), 3);
      std::vector<Value> x3y(40);
      for (std::size_t i = 0; i < 40; ++i) x3y[i] = x[i] + 3 * y[i];
      EXPECT_EQ(scaled, sk.apply(x3y));
      std::vector<Index> idx;
      std::vector<Value> vals;
      for (std::size_t i = 0; i < 40; ++i)
        if (x[i] != 0) {
          idx.push_back(static_cast<Index>(i));
          vals.push_back(x[i]);
        }
      EXPECT_EQ(sk.apply_sparse(idx, vals), sk.apply(x));
    }
  }
}

TEST(LpSketch, SeedDeterminismAndWireRoundTrip) {
  Rng rng(6);
  const auto x = random_vector(30, 0.5, 9, rng);
  for (double p : {0.0, 1.0, 2.0}) {
    const LpSketch s1(spec_of(p, 0.25, 30, 77)), s2(spec_of(p, 0.25, 30, 77));
    WireWriter w1, w2;
    s1.encode(w1, s1.apply(x));
    s2.encode(w2, s2.apply(x));
    EXPECT_EQ(w1.bytes(), w2.bytes());
    const std::size_t bits = w1.bit_length();
    WireReader r(w1.take_bytes(), bits);
    const LpSketch holder(spec_of(p, 0.25, 30, 0), false);
    const auto back = holder.decode(r);
    EXPECT_TRUE(r.exhausted());
    if (p != 1.0) {
      EXPECT_EQ(back, s1.apply(x));  // integer sketches travel losslessly
    }
    EXPECT_DOUBLE_EQ(holder.estimate(back), s1.estimate(s1.quantize(s1.apply(x))));
  }
}

TEST(LpSketch, UnitVectorAtPTwo) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LpSketch sk(spec_of(2.0, 0.25, 16, seed));
    std::vector<Value> e1(16, 0);
    e1[1] = 1;
    const double est = sk.estimate(sk.apply(e1));
    EXPECT_GE(est, 1.0 / 1.25);
    EXPECT_LE(est, 1.25);
  }
}

TEST(LpSketch, DistinctCountOf37) {
  Rng rng(8);
  std::vector<Value> x(200, 0);
  std::vector<std::size_t> pos(200);
  for (std::size_t i = 0; i < 200; ++i) pos[i] = i;
  std::shuffle(pos.begin(), pos.end(), rng);
  for (int k = 0; k < 37; ++k) x[pos[k]] = 1 + static_cast<Value>(rng.below(5));
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const LpSketch sk(spec_of(0.0, 0.2, 200, 1000 + seed));
    const double est = sk.estimate(sk.quantize(sk.apply(x)));
    ok += (est >= 30.8 && est <= 44.4) ? 1 : 0;
  }
  EXPECT_GE(ok, 475);  // 1 - delta of 500
}

TEST(LpSketch, StableThreeHalves) {
  Rng rng(9);
  const auto x = random_vector(100, 0.4, 30, rng);
  const double truth = exact_lp(x, 1.5);
  int ok = 0;
  // Measured failure rate is close to delta itself, so this uses the same
  // 2 delta finite-sample slack as the guarantee suite.
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const LpSketch sk(spec_of(1.5, 0.25, 100, 2000 + seed));
    const double est = sk.estimate(sk.quantize(sk.apply(x)));
    ok += (est <= truth * 1.25 && est >= truth / 1.25) ? 1 : 0;
  }
  EXPECT_GE(ok, 450);
}

TEST(LpSketch, QuantizationErrorWithinTenthOfEps) {
  Rng rng(10);
  for (double p : {0.5, 1.0, 1.5}) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const LpSketch sk(spec_of(p, 0.25, 64, 3000 + seed));
      const auto x = random_vector(64, 0.5, 1 << 20, rng);
      const auto raw = sk.apply(x);
      const double e0 = sk.estimate(raw);
      const double e1 = sk.estimate(sk.quantize(raw));
      EXPECT_LE(std::abs(e1 - e0), 0.025 * e0);
    }
  }
}

TEST(LpSketch, QuantizedCoordinatesAreThirtyTwoBit) {
  Rng rng(12);
  const LpSketch sk(spec_of(1.0, 0.25, 64, 4));
  WireWriter w;
  sk.encode(w, sk.apply(random_vector(64, 0.5, 1000, rng)));
  EXPECT_EQ(w.bit_length(), 16u + 32u * sk.rows());
}

// 500 seeds x 20 vectors per p; failure rate at most twice delta.
TEST(LpSketch, EmpiricalGuaranteeSuite) {
  constexpr double kEps = 0.25;
  constexpr double kDelta = 0.05;
  constexpr Index kDim = 48;
  Rng vrng(13);
  std::vector<std::vector<Value>> xs;
  for (int v = 0; v < 20; ++v) xs.push_back(random_vector(kDim, 0.05 + 0.045 * v, 1 + 3 * v, vrng));
  for (auto& x : xs)
    if (exact_lp(x, 0.0) == 0) x[0] = 1;
  for (double p : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    int fail = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      LpSketchSpec spec = spec_of(p, kEps, kDim, prf(99, seed));
      spec.delta = kDelta;
      const LpSketch sk(spec);
      for (const auto& x : xs) {
        const double truth = exact_lp(x, p);
        const double est = sk.estimate(sk.quantize(sk.apply(x)));
        fail += (est > truth * (1 + kEps) || est < truth / (1 + kEps)) ? 1 : 0;
        ++total;
      }
    }
    EXPECT_LE(fail, 2 * kDelta * total) << "p = " << p;
  }
}

TEST(StableMedian, KnownValues) {
  EXPECT_NEAR(stable_abs_median(1.0), 1.0, 1e-6);  // Cauchy
  EXPECT_NEAR(stable_abs_median(2.0), std::sqrt(2.0) * 0.6744897501960817, 1e-5);
}

TEST(L0Sampler, Singleton) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const L0Sampler s(10, seed);
    std::vector<Value> e5(10, 0);
    e5[5] = 3;
    const L0Outcome o = s.sample(s.apply(e5));
    if (const Index* i = std::get_if<Index>(&o)) EXPECT_EQ(*i, 5);
    else EXPECT_TRUE(std::holds_alternative<L0Fail>(o));
  }
}

TEST(L0Sampler, ZeroVectorIsEmpty) {
  const L0Sampler s(10, 1);
  EXPECT_TRUE(std::holds_alternative<L0Empty>(s.sample(s.apply(std::vector<Value>(10, 0)))));
}

TEST(L0Sampler, ShapeAndLinearity) {
  const L0Sampler s(100, 3);
  EXPECT_EQ(s.levels(), 8u);
  EXPECT_EQ(s.reps(), 14u);
  Rng rng(4);
  const auto x = random_vector(100, 0.2, 9, rng);
  const auto y = random_vector(100, 0.2, 9, rng);
  std::vector<Value> x2y(100);
  for (std::size_t i = 0; i < 100; ++i) x2y[i] = x[i] + 2 * y[i];
  auto st = s.apply(x);
  st.add_scaled(s.apply(y), 2);
  EXPECT_EQ(st, s.apply(x2y));
  WireWriter w;
  s.encode(w, st);
  const std::size_t bits = w.bit_length();
  WireReader r(w.take_bytes(), bits);
  EXPECT_EQ(s.decode(r), st);
}

TEST(L0Sampler, UniformOverThreeIndices) {
  std::array<int, 8> hits{};
  int fails = 0;
  constexpr int kDraws = 30000;
  std::vector<Value> x(8, 0);
  x[2] = 1;
  x[5] = 4;
  x[7] = 2;
  for (int t = 0; t < kDraws; ++t) {
    const L0Sampler s(8, prf(7, static_cast<std::uint64_t>(t)));
    const L0Outcome o = s.sample(s.apply(x));
    if (const Index* i = std::get_if<Index>(&o)) ++hits[static_cast<std::size_t>(*i)];
    else ++fails;
  }
  const double ok = kDraws - fails;
  for (int i : {2, 5, 7}) EXPECT_NEAR(hits[static_cast<std::size_t>(i)] / ok, 1.0 / 3.0, 0.02);
  EXPECT_EQ(hits[2] + hits[5] + hits[7], kDraws - fails);
}

// Every vector over {0,1} up to length 12 and over {0,1,2} up to length 7:
// a returned index is always in the support.
TEST(L0Sampler, ExhaustiveSoundness) {
  for (Index n = 1; n <= 12; ++n) {
    const L0Sampler s(n, static_cast<std::uint64_t>(n) * 31);
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
      std::vector<Value> x(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (mask >> i) & 1U;
      const L0Outcome o = s.sample(s.apply(x));
      if (const Index* i = std::get_if<Index>(&o)) ASSERT_EQ(x[static_cast<std::size_t>(*i)], 1);
      if (mask == 0) ASSERT_TRUE(std::holds_alternative<L0Empty>(o));
    }
  }
  for (Index n = 1; n <= 7; ++n) {
    const L0Sampler s(n, static_cast<std::uint64_t>(n) * 57);
    std::uint32_t total = 1;
    for (Index i = 0; i < n; ++i) total *= 3;
    for (std::uint32_t code = 0; code < total; ++code) {
      std::vector<Value> x(static_cast<std::size_t>(n));
      std::uint32_t c = code;
      for (auto& v : x) {
        v = c % 3;
        c /= 3;
      }
      const L0Outcome o = s.sample(s.apply(x));
      if (const Index* i = std::get_if<Index>(&o)) ASSERT_NE(x[static_cast<std::size_t>(*i)], 0);
    }
  }
}

TEST(BlockedL2, ShapeAndZero) {
  const BlockedL2Sketch s(100, 4.0, 1);
  EXPECT_EQ(s.block_size(), 16);
  EXPECT_EQ(s.block_count(), 7);
  EXPECT_EQ(s.rows(), 7u * 28u);
  EXPECT_EQ(s.linf_estimate(s.apply(std::vector<Value>(100, 0))), 0.0);
  const BlockedL2Sketch one(10, 8.0, 1);  // kappa^2 > n: one block
  EXPECT_EQ(one.block_count(), 1);
}

TEST(BlockedL2, SpikeWithinFactorKappa) {
  constexpr double kKappa = 4.0;
  constexpr Value kM = 1000;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const BlockedL2Sketch s(64, kKappa, seed);
    std::vector<Value> x(64, 0);
    x[static_cast<std::size_t>(seed % 64)] = kM;
    const double est = s.linf_estimate(s.apply(x));
    ok += (est >= kM / (2 * kKappa) && est <= 2 * kM) ? 1 : 0;
  }
  EXPECT_EQ(ok, 500);
}

TEST(BlockedL2, DenseEqualEntriesNotBelowEntry) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const BlockedL2Sketch s(64, 4.0, seed);
    EXPECT_GE(s.linf_estimate(s.apply(std::vector<Value>(64, 7))), 7.0);
  }
}

TEST(BlockedL2, RowsTouchOnlyTheirBlock) {
  const BlockedL2Sketch s(40, 3.0, 2);
  std::vector<Value> x(40, 0);
  x[10] = 5;  // block 1 (size 9)
  const auto y = s.apply(x);
  for (std::size_t r = 0; r < y.size(); ++r)
    if (s.block_of_row(r) != 1) EXPECT_EQ(y[r], 0);
}

}  // namespace
}  // namespace mpstat
