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

#include "mpstat/channel.hpp"

#include <gtest/gtest.h>

#include "mpstat/proto_lp.hpp"
#include "oracles.hpp"

namespace mpstat {
namespace {

WireWriter field(std::uint64_t v, unsigned width) {
  WireWriter w;
  w.uint(v, width);
  return w;
}

WireReader reader_of(WireWriter& w) {
  const std::size_t bits = w.bit_length();
  return WireReader(w.take_bytes(), bits);
}

TEST(Wire, FixedWidthColumnSums) {
  ProtocolSession s(1);
  std::vector<std::uint64_t> sums(1000);
  Rng rng(3);
  for (auto& v : sums) v = rng.below(1U << 20);
  WireWriter w;
  w.uints(sums, 20);
  s.send(Party::kAlice, std::move(w));
  EXPECT_EQ(s.bits_total(), 20000u);
  WireReader r = s.receive(Party::kBob);
  EXPECT_EQ(r.uints(1000, 20), sums);
  EXPECT_TRUE(r.exhausted());
}

TEST(Wire, FieldOverflowIsAViolation) {
  WireWriter w;
  EXPECT_THROW(w.uint(8, 3), ProtocolViolation);
  EXPECT_THROW(w.uint(0, 65), ProtocolViolation);
}

TEST(Wire, IndexSetHandEncoding) {
  // Gaps 3,1,4,1,5,9,2,6,5,35 all fit one varint byte; plus the count byte.
  const std::vector<Index> set{3, 4, 8, 9, 14, 23, 25, 31, 36, 71};
  WireWriter w;
  w.index_set(set);
  EXPECT_EQ(w.bit_length(), 8u * 11u);
  EXPECT_EQ(w.bytes()[0], 10);
  EXPECT_EQ(w.bytes()[1], 3);
  EXPECT_EQ(w.bytes()[10], 35);
  // A 200 gap needs two varint groups.
  WireWriter w2;
  w2.index_set(std::vector<Index>{0, 200});
  EXPECT_EQ(w2.bit_length(), 8u * 4u);
  WireReader r = reader_of(w);
  EXPECT_EQ(r.index_set(), set);
  WireWriter bad;
  EXPECT_THROW(bad.index_set(std::vector<Index>{4, 4}), ProtocolViolation);
}

TEST(Wire, RoundTripsEveryElement) {
  WireWriter w;
  w.uint(5, 3).sint(-7, 5).varint(300).real64(-2.5);
  const std::vector<std::uint64_t> u{0, 9, 1023};
  const std::vector<std::int64_t> si{-4, 0, 17};
  w.uints_minimal(u).sints_minimal(si);
  const std::vector<Index> cols{1, 5, 6};
  const std::vector<Value> vals{2, 1, 400};
  w.sparse_row(cols, vals);
  QuantizedVector q{{-5, 7, 1 << 30}, -12};
  w.quantized(q);
  WireWriter tail;
  tail.uint(1, 1).varint(77);
  w.append(tail);
  WireReader r = reader_of(w);
  EXPECT_EQ(r.uint(3), 5u);
  EXPECT_EQ(r.sint(5), -7);
  EXPECT_EQ(r.varint(), 300u);
  EXPECT_EQ(r.real64(), -2.5);
  EXPECT_EQ(r.uints_minimal(3), u);
  EXPECT_EQ(r.sints_minimal(3), si);
  std::vector<Index> c2;
  std::vector<Value> v2;
  r.sparse_row(c2, v2);
  EXPECT_EQ(c2, cols);
  EXPECT_EQ(v2, vals);
  const auto q2 = r.quantized(3);
  EXPECT_EQ(q2.mantissas, q.mantissas);
  EXPECT_EQ(q2.exponent, q.exponent);
  EXPECT_DOUBLE_EQ(q2.value(0), -5.0 / 4096.0);
  EXPECT_EQ(r.uint(1), 1u);
  EXPECT_EQ(r.varint(), 77u);
  EXPECT_TRUE(r.exhausted());
  EXPECT_THROW(r.uint(1), ProtocolViolation);
}

TEST(Wire, MinimalWidthHeader) {
  WireWriter w;
  std::vector<std::uint64_t> v(10, 5);  // width 3
  w.uints_minimal(v);
  EXPECT_EQ(w.bit_length(), 7u + 30u);
  WireWriter z;
  z.uints_minimal(std::vector<std::uint64_t>(50, 0));
  EXPECT_EQ(z.bit_length(), 7u);
}

TEST(Session, RoundsCountSenderAlternation) {
  ProtocolSession s(1);
  EXPECT_EQ(s.rounds(), 0u);
  s.send(Party::kAlice, field(1, 1));
  s.send(Party::kAlice, field(1, 1));
  EXPECT_EQ(s.rounds(), 1u);
  s.send(Party::kBob, field(1, 1));
  s.send(Party::kAlice, field(1, 1));
  EXPECT_EQ(s.rounds(), 3u);
  EXPECT_EQ(s.bits_by(Party::kAlice), 3u);
  EXPECT_EQ(s.bits_by(Party::kBob), 1u);
  std::uint64_t sum = 0;
  for (const auto& m : s.messages()) {
    sum += m.bit_length;
    EXPECT_EQ(m.bit_length, 8 * m.payload.size() - m.padding_bits());
  }
  EXPECT_EQ(sum, s.message_bits());
}

TEST(Session, EndpointsOnlySeeTheOtherPartysMessages) {
  ProtocolSession s(1);
  Endpoint a = s.alice();
  Endpoint b = s.bob();
  EXPECT_THROW(b.receive(), ProtocolViolation);
  a.send(field(6, 3));
  EXPECT_THROW(a.receive(), ProtocolViolation);
  EXPECT_EQ(b.receive().uint(3), 6u);
  EXPECT_THROW(b.receive(), ProtocolViolation);
}

TEST(Session, FinishFreezesTheReport) {
  ProtocolSession empty(5);
  const auto r0 = empty.finish(Party::kBob, 0.0);
  EXPECT_EQ(r0.bits_total, 0u);
  EXPECT_EQ(r0.rounds, 0u);
  EXPECT_EQ(r0.seed, 5u);
  EXPECT_THROW(empty.finish(Party::kBob, 0.0), ProtocolViolation);
  EXPECT_THROW(empty.send(Party::kAlice, WireWriter()), ProtocolViolation);

  ProtocolSession one(6);
  one.send(Party::kAlice, field(3, 2));
  EXPECT_EQ(one.finish(Party::kBob, 1.0).rounds, 1u);
}

TEST(Session, AlgorithmOneUsesTwoRounds) {
  const auto a = oracle::random_matrix(8, 8, 0.3, 1, 1);
  const auto b = oracle::random_matrix(8, 8, 0.3, 1, 2);
  ProtocolSession s(9);
  EXPECT_EQ(run_lp_estimate(a, b, LpProtocolParams{}, s).rounds, 2u);
}

TEST(Session, SharedRandomnessAgreesAndIsBilledOnce) {
  ProtocolSession s(42);
  EXPECT_EQ(s.seed_bits(), 0u);
  const auto x = s.draw_shared_randomness(Party::kAlice, 100);
  const auto y = s.draw_shared_randomness(Party::kBob, 100);
  EXPECT_EQ(x, y);
  EXPECT_EQ(s.seed_bits(), ProtocolSession::kSeedExchangeBits);
  s.draw_shared_randomness(Party::kAlice, 100);
  EXPECT_EQ(s.bits_total(), 64u);
  EXPECT_EQ(s.rng_draws(Party::kAlice), 2u);

  ProtocolSession t(42);
  EXPECT_EQ(t.draw_shared_randomness(Party::kBob, 100), x);
}

TEST(Session, DistinctSeedsGiveDistinctStreams) {
  int differ = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    ProtocolSession s(2 * k), t(2 * k + 1);
    differ += s.draw_shared_randomness(Party::kAlice, 128) !=
              t.draw_shared_randomness(Party::kAlice, 128);
  }
  EXPECT_EQ(differ, 100);
}

TEST(Session, TranscriptDumpFormat) {
  ProtocolSession s(1);
  s.send(Party::kBob, std::move(WireWriter().uint(0xAB, 8).uint(1, 1)));
  const auto d = s.transcript_dump();
  ASSERT_EQ(d.size(), 1u + 4u + 2u);
  EXPECT_EQ(d[0], 1);
  EXPECT_EQ(d[1], 2);
  EXPECT_EQ(d[5], 0xAB);
  EXPECT_EQ(d[6], 1);
}

TEST(Session, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64({}), 0xCBF29CE484222325ULL);
  const std::uint8_t a[] = {'a'};
  EXPECT_EQ(fnv1a64(a), 0xAF63DC4C8601EC8CULL);
}

}  // namespace
}  // namespace mpstat
