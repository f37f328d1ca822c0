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

#include "mpstat/proto_lp.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <map>

#include "oracles.hpp"

namespace mpstat {
namespace {

bool within(double est, double truth, double eps) {
  return est <= truth * (1 + eps) && est >= truth / (1 + eps);
}

TEST(LpParams, Derived) {
  LpProtocolParams p;
  p.eps = 0.16;
  EXPECT_DOUBLE_EQ(p.beta() * p.beta(), 0.16);
  EXPECT_DOUBLE_EQ(p.rho() * p.eps, p.c_rho);
  p.p = 2.1;
  EXPECT_THROW(p.validate(), InvalidInput);
  p.p = 1;
  p.eps = 1.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p.eps = 0.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p.eps = 0.2;
  p.boost_reps = 2;
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(LpGroups, LevelsAndProbabilities) {
  EXPECT_EQ(group_level(1.0, 0.5), 0);
  EXPECT_EQ(group_level(1.5, 0.5), 1);
  EXPECT_EQ(group_level(1.49, 0.5), 0);
  EXPECT_EQ(group_level(0.5, 0.5), -2);
  EXPECT_EQ(group_level(0.0, 0.5), kZeroRowLevel);
  for (double e : {0.3, 1.0, 7.7, 1e6}) {
    const auto l = group_level(e, 0.2);
    EXPECT_LE(std::pow(1.2, static_cast<double>(l)), e);
    EXPECT_GT(std::pow(1.2, static_cast<double>(l + 1)), e);
  }
  EXPECT_EQ(encode_prob(1.0), UINT32_MAX);
  EXPECT_DOUBLE_EQ(decode_prob(encode_prob(1.0)), 1.0);
  for (double p : {1e-9, 0.3, 0.5, 0.999999}) EXPECT_GE(decode_prob(encode_prob(p)), p);

  const std::vector<double> est{0.0, 1.0, 1.1, 10.0, 100.0};
  const auto t = build_row_groups(est, 0.5, 1.0);
  EXPECT_EQ(t.row_level[0], kZeroRowLevel);
  std::size_t members = 0;
  for (const auto& g : t.groups) {
    members += g.rows.size();
    EXPECT_GT(g.prob, 0.0);
    EXPECT_LE(g.prob, 1.0);
    for (Index i : g.rows) EXPECT_EQ(t.row_level[static_cast<std::size_t>(i)], g.level);
  }
  EXPECT_EQ(members, 4u);
  const RowGroup* top = t.find(group_level(100.0, 0.5));
  ASSERT_NE(top, nullptr);
  EXPECT_GE(top->prob, 100.0 / 112.1);
  EXPECT_LT(top->prob, 100.0 / 112.1 + 1e-9);
  // rho large enough clamps every group to 1.
  for (const auto& g : build_row_groups(est, 0.5, 1e4).groups) EXPECT_EQ(g.prob, 1.0);
  EXPECT_EQ(t.find(12345), nullptr);
}

TEST(LpEstimate, ZeroInputsGiveZero) {
  ProtocolSession s(1);
  const auto r = run_lp_estimate(SparseIntMatrix::zeros(8, 8), SparseIntMatrix::zeros(8, 8),
                                 LpProtocolParams{}, s);
  EXPECT_EQ(r.scalar(), 0.0);
  EXPECT_EQ(r.rounds, 2u);
}

TEST(LpEstimate, RejectsBadParameters) {
  ProtocolSession s(1);
  LpProtocolParams p;
  p.p = 3.0;
  EXPECT_THROW(run_lp_estimate(SparseIntMatrix::identity(4), SparseIntMatrix::identity(4), p, s),
               InvalidInput);
  p.p = 1.0;
  EXPECT_THROW(run_lp_estimate(SparseIntMatrix::identity(4), SparseIntMatrix::identity(3), p, s),
               InvalidInput);
}

TEST(LpEstimate, IdentityDistinctCount) {
  constexpr Index n = 32;
  const auto id = SparseIntMatrix::identity(n);
  LpProtocolParams p;
  p.p = 0.0;
  p.eps = 0.25;
  int ok = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    ProtocolSession s(prf(1, t));
    ok += within(run_lp_estimate(id, id, p, s).scalar(), n, 0.25);
  }
  EXPECT_GE(ok, 170);
}

TEST(LpEstimate, RandomBinaryL1) {
  LpProtocolParams p;
  p.p = 1.0;
  int ok = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto a = oracle::random_matrix(32, 32, 0.2, 1, prf(2, t));
    const auto b = oracle::random_matrix(32, 32, 0.2, 1, prf(3, t));
    const double truth = oracle::lp_pow(oracle::multiply(oracle::dense_of(a), oracle::dense_of(b)), 1.0);
    ProtocolSession s(prf(4, t));
    const auto r = run_lp_estimate(a, b, p, s);
    EXPECT_EQ(r.rounds, 2u);
    ok += within(r.scalar(), truth, p.eps);
  }
  EXPECT_GE(ok, 170);
}

TEST(LpEstimate, BoostRepsTakeTheMedian) {
  const auto a = oracle::random_matrix(16, 16, 0.3, 3, 5);
  const auto b = oracle::random_matrix(16, 16, 0.3, 3, 6);
  LpProtocolParams p;
  p.boost_reps = 5;
  ProtocolSession s(7);
  LpRunTrace tr;
  const auto r = run_lp_estimate(a, b, p, s, &tr);
  EXPECT_EQ(r.rounds, 2u);
  ASSERT_EQ(tr.repetition_estimates.size(), 5u);
  auto v = tr.repetition_estimates;
  std::sort(v.begin(), v.end());
  EXPECT_DOUBLE_EQ(r.scalar(), v[2]);
}

// With the sketch phase frozen, the sampling phase is unbiased for the
// exact norm of the grouped rows.
TEST(LpEstimate, SamplingPhaseUnbiased) {
  const auto a = oracle::random_matrix(40, 24, 0.25, 4, 8);
  const auto b = oracle::random_matrix(24, 24, 0.25, 4, 9);
  for (double pp : {0.0, 1.0, 2.0}) {
    LpProtocolParams p;
    p.p = pp;
    p.c_rho = 1.0;  // small rho so sampling is active
    ProtocolSession s(10);
    LpRunTrace tr;
    run_lp_estimate(a, b, p, s, &tr);
    double grouped = 0.0, var = 0.0;
    for (const auto& g : tr.table.groups)
      for (Index i : g.rows) {
        const double ci = row_product_lp(a, i, b, pp);
        grouped += ci;
        var += ci * ci * (1.0 / g.prob - 1.0);
      }
    Rng rng(11);
    constexpr int kDraws = 10000;
    double sum = 0.0;
    for (int k = 0; k < kDraws; ++k) sum += sampled_estimate(a, b, tr.table, pp, rng);
    EXPECT_NEAR(sum / kDraws, grouped, 5.0 * std::sqrt(var / kDraws) + 1e-9) << "p = " << pp;
  }
}

// Every sampled row in round 2 carries a level code matching its estimate.
TEST(LpEstimate, TranscriptGroupMembership) {
  const auto a = oracle::random_matrix(32, 32, 0.2, 2, 12);
  const auto b = oracle::random_matrix(32, 32, 0.2, 2, 13);
  LpProtocolParams p;
  p.c_rho = 2.0;
  ProtocolSession s(14);
  LpRunTrace tr;
  run_lp_estimate(a, b, p, s, &tr);
  const Message& m = s.messages().back();
  ASSERT_EQ(m.sender, Party::kAlice);
  WireReader r(m.payload, m.bit_length);
  std::vector<std::int64_t> level(32);
  for (auto& l : level) {
    const auto code = r.uint(16);
    l = code == 0 ? kZeroRowLevel : static_cast<std::int64_t>(code) - (1 << 15);
  }
  const auto groups = r.varint();
  for (std::uint64_t g = 0; g < groups; ++g) {
    r.uint(16);
    r.uint(32);
  }
  const auto rows = r.index_set();
  EXPECT_EQ(rows, tr.sampled_rows);
  const double base = 1.0 + p.beta();
  for (Index i : rows) {
    const double e = tr.row_estimates[static_cast<std::size_t>(i)];
    const auto l = static_cast<double>(level[static_cast<std::size_t>(i)]);
    EXPECT_LE(std::pow(base, l), e);
    EXPECT_LT(e, std::pow(base, l + 1));
  }
}

TEST(LpBaseline, OneRoundAndAccurate) {
  const auto a = oracle::random_matrix(24, 24, 0.3, 1, 15);
  const auto b = oracle::random_matrix(24, 24, 0.3, 1, 16);
  const double truth = oracle::lp_pow(oracle::multiply(oracle::dense_of(a), oracle::dense_of(b)), 2.0);
  LpProtocolParams p;
  p.p = 2.0;
  ProtocolSession s(17);
  const auto r = run_lp_baseline(a, b, p, s);
  EXPECT_EQ(r.rounds, 1u);
  EXPECT_EQ(r.output_party, Party::kAlice);
  EXPECT_TRUE(within(r.scalar(), truth, 0.25));
}

TEST(L1Exact, HandCases) {
  ProtocolSession s1(1);
  EXPECT_EQ(run_l1_exact(SparseIntMatrix::ones(2, 2), SparseIntMatrix::ones(2, 2), s1).scalar(), 8.0);
  const auto b = oracle::random_matrix(6, 6, 0.5, 9, 2);
  ProtocolSession s2(2);
  EXPECT_EQ(run_l1_exact(SparseIntMatrix::identity(6), b, s2).scalar(),
            static_cast<double>(l1_norm(b)));
}

TEST(L1Exact, MatchesOracle) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Index n = 1 + static_cast<Index>(t % 30);
    const auto a = oracle::random_matrix(n, n + 2, 0.1 + 0.01 * static_cast<double>(t), 20, 100 + t);
    const auto b = oracle::random_matrix(n + 2, 5, 0.3, 20, 200 + t);
    ProtocolSession s(t);
    const auto r = run_l1_exact(a, b, s);
    EXPECT_EQ(r.scalar(), oracle::lp_pow(oracle::multiply(oracle::dense_of(a), oracle::dense_of(b)), 1.0));
    EXPECT_EQ(r.rounds, 1u);
  }
}

TEST(L1Sample, SingleNonzeroAlwaysReturned) {
  const auto a = SparseIntMatrix::from_triplets(6, 6, {{3, 2, 2}});
  const auto b = SparseIntMatrix::from_triplets(6, 6, {{2, 4, 5}});
  for (std::uint64_t t = 0; t < 100; ++t) {
    ProtocolSession s(t);
    const auto r = run_l1_sample(a, b, s);
    EXPECT_EQ(r.sample(), (EntrySample{3, 4, 2}));
    EXPECT_EQ(r.rounds, 1u);
  }
}

TEST(L1Sample, ZeroProductIsEmpty) {
  ProtocolSession s(1);
  const auto r = run_l1_sample(SparseIntMatrix::identity(3), SparseIntMatrix::zeros(3, 3), s);
  EXPECT_TRUE(std::holds_alternative<EmptySignal>(r.result));
}

TEST(L1Sample, IdentitySymmetry) {
  const auto id = SparseIntMatrix::identity(2);
  int zero = 0;
  for (std::uint64_t t = 0; t < 10000; ++t) {
    ProtocolSession s(prf(5, t));
    const auto e = run_l1_sample(id, id, s).sample();
    EXPECT_EQ(e.row, e.col);
    zero += e.row == 0;
  }
  EXPECT_NEAR(zero / 10000.0, 0.5, 0.05);
}

TEST(L1Sample, ExactDistribution) {
  const auto a = oracle::random_matrix(8, 8, 0.4, 3, 21);
  const auto b = oracle::random_matrix(8, 8, 0.4, 3, 22);
  const auto c = oracle::multiply(oracle::dense_of(a), oracle::dense_of(b));
  const double total = oracle::lp_pow(c, 1.0);
  std::map<std::pair<Index, Index>, int> hits;
  constexpr int kDraws = 100000;
  for (int t = 0; t < kDraws; ++t) {
    ProtocolSession s(prf(6, static_cast<std::uint64_t>(t)));
    const auto e = run_l1_sample(a, b, s).sample();
    ASSERT_TRUE(e.witness.has_value());
    ASSERT_GT(a.at(e.row, *e.witness), 0);
    ASSERT_GT(b.at(*e.witness, e.col), 0);
    ++hits[{e.row, e.col}];
  }
  double tv = 0.0;
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j) {
      const auto it = hits.find({i, j});
      const double f = it == hits.end() ? 0.0 : it->second / static_cast<double>(kDraws);
      tv += std::abs(f - static_cast<double>(c(i, j)) / total);
    }
  EXPECT_LE(tv / 2, 0.02);
}

TEST(L0SampleMatrix, IdentitySymmetry) {
  const auto id = SparseIntMatrix::identity(2);
  int zero = 0, ok = 0;
  for (std::uint64_t t = 0; t < 10000; ++t) {
    ProtocolSession s(prf(7, t));
    const auto r = run_l0_sample_matrix(id, id, L0SampleParams{}, s);
    EXPECT_EQ(r.rounds, 1u);
    if (!std::holds_alternative<EntrySample>(r.result)) continue;
    ++ok;
    EXPECT_EQ(r.sample().row, r.sample().col);
    zero += r.sample().row == 0;
  }
  EXPECT_GE(ok, 9900);
  EXPECT_NEAR(zero / static_cast<double>(ok), 0.5, 0.05);
}

TEST(L0SampleMatrix, SingleNonzero) {
  const auto a = SparseIntMatrix::from_triplets(5, 5, {{1, 3, 1}});
  const auto b = SparseIntMatrix::from_triplets(5, 5, {{3, 0, 2}});
  for (std::uint64_t t = 0; t < 200; ++t) {
    ProtocolSession s(t);
    const auto r = run_l0_sample_matrix(a, b, L0SampleParams{}, s);
    if (std::holds_alternative<SampleFailure>(r.result)) continue;
    EXPECT_EQ(r.sample().row, 1);
    EXPECT_EQ(r.sample().col, 0);
  }
}

TEST(L0SampleMatrix, EmptyAndSoundness) {
  ProtocolSession s(1);
  EXPECT_TRUE(std::holds_alternative<EmptySignal>(
      run_l0_sample_matrix(SparseIntMatrix::zeros(4, 4), SparseIntMatrix::ones(4, 4),
                           L0SampleParams{}, s).result));
  const auto a = oracle::random_matrix(12, 12, 0.2, 3, 31);
  const auto b = oracle::random_matrix(12, 12, 0.2, 3, 32);
  const auto c = multiply(a, b);
  for (std::uint64_t t = 0; t < 500; ++t) {
    ProtocolSession st(prf(8, t));
    const auto r = run_l0_sample_matrix(a, b, L0SampleParams{}, st);
    if (const auto* e = std::get_if<EntrySample>(&r.result)) EXPECT_GT(c.at(e->row, e->col), 0);
  }
}

}  // namespace
}  // namespace mpstat
