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

#include "mpstat/hardgen.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

namespace mpstat {
namespace {

using Bits = std::vector<std::uint8_t>;

std::int64_t oracle_linf(const SparseIntMatrix& a, const SparseIntMatrix& b) {
  return oracle::linf(oracle::multiply(oracle::dense_of(a), oracle::dense_of(b)));
}

bool binary_flag_consistent(const SparseIntMatrix& m) {
  bool all_ones = true;
  for (const auto& t : m.triplets()) all_ones = all_ones && t.value == 1;
  return all_ones == m.is_binary();
}

TEST(Disj, SmallCases) {
  const auto zero = gen_disj_embedding(Bits(4, 0), Bits(4, 0));
  EXPECT_EQ(oracle_linf(zero.a, zero.b), 0);
  const auto hit = gen_disj_embedding({1, 0, 0, 0}, {1, 0, 0, 0});
  EXPECT_EQ(oracle_linf(hit.a, hit.b), 2);
  EXPECT_TRUE(hit.intersecting);
  const auto miss = gen_disj_embedding({1, 0, 0, 0}, {0, 1, 0, 0});
  EXPECT_EQ(oracle_linf(miss.a, miss.b), 1);
  EXPECT_FALSE(miss.intersecting);
  EXPECT_EQ(hit.a.rows(), 4);
}

TEST(Disj, Rejections) {
  EXPECT_THROW(gen_disj_embedding(Bits(3, 0), Bits(3, 0)), InvalidInput);
  EXPECT_THROW(gen_disj_embedding(Bits(4, 0), Bits(9, 0)), InvalidInput);
  EXPECT_THROW(gen_disj_embedding({2, 0, 0, 0}, Bits(4, 0)), InvalidInput);
  EXPECT_THROW(gen_disj_embedding({}, {}), InvalidInput);
}

TEST(Disj, TopLeftBlockIsSumAndGroundTruth) {
  Rng rng(1);
  for (int t = 0; t < 500; ++t) {
    const std::size_t half = 1 + rng.below(6);
    Bits x(half * half), y(half * half);
    const double d = rng.uniform() * 0.3;
    for (auto& b : x) b = rng.bernoulli(d);
    for (auto& b : y) b = rng.bernoulli(d);
    const auto e = gen_disj_embedding(x, y);
    ASSERT_TRUE(e.a.is_binary() && e.b.is_binary());
    const auto c = oracle::multiply(oracle::dense_of(e.a), oracle::dense_of(e.b));
    const auto h = static_cast<Eigen::Index>(half);
    bool any = false;
    std::int64_t block_max = 0;
    for (Eigen::Index r = 0; r < h; ++r)
      for (Eigen::Index s = 0; s < h; ++s) {
        const auto k = static_cast<std::size_t>(r * h + s);
        ASSERT_EQ(c(r, s), x[k] + y[k]);
        any = any || x[k] || y[k];
        block_max = std::max(block_max, c(r, s));
      }
    // nothing outside the block
    EXPECT_EQ(c.sum(), c.topLeftCorner(h, h).sum());
    EXPECT_EQ(block_max, e.intersecting ? 2 : (any ? 1 : 0));
  }
}

TEST(GapInf, Cases) {
  const auto z = gen_gapinf_embedding(std::vector<Value>(9, 0), std::vector<Value>(9, 0), 5);
  EXPECT_EQ(*z.meta.planted_linf, 0.0);
  std::vector<Value> x(9, 0), y(9, 0);
  x[4] = 5;
  y[4] = 5;
  EXPECT_EQ(oracle_linf(gen_gapinf_embedding(x, y, 5).a, gen_gapinf_embedding(x, y, 5).b), 10);
  x[4] = 6;
  EXPECT_THROW(gen_gapinf_embedding(x, y, 5), InvalidInput);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    std::vector<Value> u(16), v(16);
    for (auto& e : u) e = static_cast<Value>(rng.below(2));
    for (auto& e : v) e = static_cast<Value>(rng.below(2));
    const auto i = rng.below(16);
    u[i] = 7;  // a far coordinate
    v[i] = 7;
    const auto h = gen_gapinf_embedding(u, v, 7);
    EXPECT_EQ(static_cast<double>(oracle_linf(h.a, h.b)), *h.meta.planted_linf);
    EXPECT_EQ(*h.meta.planted_linf, 14.0);
  }
}

TEST(Sum, DefaultsAtDeskScale) {
  const auto s = gen_sum_instance(128, 0, 3);
  EXPECT_DOUBLE_EQ(s.beta, 1.0);
  EXPECT_TRUE(s.meta.notes.contains("beta"));
  EXPECT_EQ(s.k, 1);
  EXPECT_EQ(s.blocks, 128);
  EXPECT_NEAR(sum_default_beta(1024), std::sqrt(50 * std::log(1024.0) / 1024), 1e-15);
  const auto s4 = gen_sum_instance(10, 4, 3);
  EXPECT_EQ(s4.blocks, 3);
  EXPECT_EQ(s4.a.cols(), 12);
  EXPECT_TRUE(s4.meta.notes.contains("blocks"));
}

SumParams explicit_params(Index n, Index k, double beta) {
  SumParams p;
  p.n = n;
  p.k = k;
  p.beta = beta;
  return p;
}

TEST(Sum, StructureAndPlantedValues) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = gen_sum_instance(explicit_params(64, 8, 0.3), seed);
    EXPECT_EQ(sum_of_disj(s.u, s.v), s.planted_sum);
    // only the special coordinate may hold (1, 1)
    for (Index i = 0; i < s.n; ++i)
      for (Index t = 0; t < s.k; ++t) {
        const auto si = static_cast<std::size_t>(i), st = static_cast<std::size_t>(t);
        if (i != s.special_d || t != s.special_m) EXPECT_FALSE(s.u[si][st] && s.v[si][st]);
      }
    // identical horizontal blocks
    const auto da = oracle::dense_of(s.a);
    for (Index z = 1; z < s.blocks; ++z) {
      EXPECT_EQ(da.middleCols(z * s.k, s.k), da.leftCols(s.k));
    }
    EXPECT_TRUE(binary_flag_consistent(s.a) && binary_flag_consistent(s.b));
    EXPECT_EQ(static_cast<double>(oracle_linf(s.a, s.b)), *s.meta.planted_linf);
    if (s.planted_sum == 1) EXPECT_GE(*s.meta.planted_linf, 64.0 / 8.0);
  }
}

TEST(Sum, BalancedUnderPhi) {
  int zeros = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    zeros += gen_sum_instance(explicit_params(32, 4, 0.3), seed).planted_sum == 0;
  }
  EXPECT_GE(zeros, 200);
  EXPECT_LE(zeros, 300);
}

TEST(Sum, GapAtDefaults) {
  int one = 0, one_ok = 0, zero = 0, zero_ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto s = gen_sum_instance(256, 0, seed);
    const auto linf = static_cast<double>(oracle_linf(s.a, s.b));
    if (s.planted_sum == 1) {
      ++one;
      one_ok += linf >= static_cast<double>(s.n) / static_cast<double>(s.k);
    } else {
      ++zero;
      zero_ok += linf <= 2 * s.beta * s.beta * static_cast<double>(s.n);
    }
  }
  EXPECT_GE(one_ok, one * 95 / 100);
  EXPECT_GE(zero_ok, zero * 95 / 100);
}

TEST(Families, PlantedValuesMatchOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pm = gen_planted_max(32, 0.1, seed);
    EXPECT_EQ(static_cast<double>(oracle_linf(pm.a, pm.b)), *pm.meta.planted_linf);

    const auto pi = gen_planted_max_integer(32, 0.2, 5, 10, seed);
    const auto ci = oracle::multiply(oracle::dense_of(pi.a), oracle::dense_of(pi.b));
    const auto [r, c] = pi.meta.planted_pairs[0];
    EXPECT_EQ(static_cast<double>(ci(r, c)), *pi.meta.planted_linf);
    EXPECT_EQ(oracle::linf(ci), ci(r, c));
    EXPECT_EQ(static_cast<double>(ci.sum()), *pi.meta.planted_l1);

    const auto hb = gen_planted_hh_binary(32, 12, 0.05, seed);
    const auto cb = oracle::multiply(oracle::dense_of(hb.a), oracle::dense_of(hb.b));
    const auto [hr, hc] = hb.meta.planted_pairs[0];
    EXPECT_EQ(cb(hr, hc), 12);
    EXPECT_EQ(cb.row(hr).sum(), 12);
    EXPECT_EQ(cb.col(hc).sum(), 12);
    EXPECT_EQ(static_cast<double>(cb.sum()), *hb.meta.planted_l1);

    const auto hi = gen_planted_hh_integer(32, {0.5, 0.2}, 0.1, seed);
    const auto ch = oracle::multiply(oracle::dense_of(hi.a), oracle::dense_of(hi.b));
    const double total = static_cast<double>(ch.sum());
    for (std::size_t t = 0; t < 2; ++t) {
      const auto [pr, pc] = hi.meta.planted_pairs[t];
      EXPECT_EQ(static_cast<double>(ch(pr, pc)), hi.meta.params.at("value_" + std::to_string(t)));
      EXPECT_NEAR(static_cast<double>(ch(pr, pc)) / total, t == 0 ? 0.5 : 0.2, 0.02);
    }

    const auto rd = gen_random_density(16, 0.3, 1, seed);
    for (const auto* inst : {&pm, &pi, &hb, &hi, &rd}) {
      EXPECT_TRUE(binary_flag_consistent(inst->a));
      EXPECT_TRUE(binary_flag_consistent(inst->b));
    }
    EXPECT_TRUE(rd.a.is_binary());
  }
  EXPECT_THROW(gen_planted_hh_integer(16, {0.6, 0.5}, 0.1, 1), InvalidInput);
  EXPECT_THROW(gen_planted_hh_binary(16, 17, 0.1, 1), InvalidInput);
  EXPECT_THROW(gen_random_density(16, 1.5, 1, 1), InvalidInput);
}

TEST(Families, DeterministicInSeed) {
  EXPECT_EQ(gen_random_density(16, 0.3, 4, 7).a, gen_random_density(16, 0.3, 4, 7).a);
  EXPECT_NE(gen_random_density(16, 0.3, 4, 7).a, gen_random_density(16, 0.3, 4, 8).a);
  EXPECT_EQ(gen_sum_instance(64, 4, 9).a, gen_sum_instance(64, 4, 9).a);
}

TEST(Meta, JsonLinesRoundTrip) {
  auto s = gen_sum_instance(64, 0, 5);
  s.meta.planted_pairs = {{1, 2}, {3, 4}};
  s.meta.intersecting = true;
  s.meta.planted_l1 = 12.5;
  std::ostringstream out;
  write_meta_jsonl(out, s.meta);
  const std::string line = out.str();
  ASSERT_EQ(line.back(), '\n');
  EXPECT_EQ(line.find('\n'), line.size() - 1);
  const auto back = read_meta_jsonl(line);
  EXPECT_EQ(back.family, "sum-instance");
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(back.params, s.meta.params);
  EXPECT_EQ(back.notes, s.meta.notes);
  EXPECT_EQ(back.planted_sum, s.meta.planted_sum);
  EXPECT_EQ(back.planted_linf, s.meta.planted_linf);
  EXPECT_EQ(back.planted_pairs, s.meta.planted_pairs);
  EXPECT_EQ(back.intersecting, true);
  EXPECT_EQ(back.planted_l1, 12.5);
  EXPECT_THROW(read_meta_jsonl("{not json"), InvalidInput);
  EXPECT_THROW(read_meta_jsonl("{\"seed\": 1}"), InvalidInput);
}

}  // namespace
}  // namespace mpstat
