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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mpstat/matrix.hpp"
#include "mpstat/random.hpp"

namespace mpstat {

enum class Party : std::uint8_t { kAlice = 0, kBob = 1 };

constexpr Party other(Party p) {
  return p == Party::kAlice ? Party::kBob : Party::kAlice;
}
const char* party_name(Party p);

// Raised when a protocol misuses the channel (send after finish, reading a
// message that was never sent, finishing twice, decoding past the end).
class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Number of bits needed to write v in binary (0 for v == 0).
unsigned bit_width_u64(std::uint64_t v);
constexpr std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^
         static_cast<std::uint64_t>(v >> 63);
}
constexpr std::int64_t unzigzag(std::uint64_t v) {
  return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

// Real-valued vector quantized to 32-bit signed mantissas that share one
// binary exponent: value_k = mantissa_k * 2^exponent.
struct QuantizedVector {
  std::vector<std::int32_t> mantissas;
  std::int32_t exponent = 0;
  double value(std::size_t k) const;
};

// Bit-exact canonical encoder. Fields are packed LSB-first.
//  - uint(v, w): w-bit unsigned field
//  - varint: LEB128, 8 bits per 7-bit group
//  - uints_minimal: 7-bit width header then fixed-width fields
//  - index_set: varint count then varint gaps (first index absolute)
//  - sparse_row: varint count, index gaps, varint values
//  - quantized: 16-bit zigzag exponent then 32-bit mantissas
class WireWriter {
 public:
  WireWriter& uint(std::uint64_t v, unsigned width);
  WireWriter& sint(std::int64_t v, unsigned width);
  WireWriter& varint(std::uint64_t v);
  WireWriter& real64(double v);
  WireWriter& uints(std::span<const std::uint64_t> v, unsigned width);
  WireWriter& uints_minimal(std::span<const std::uint64_t> v);
  WireWriter& sints_minimal(std::span<const std::int64_t> v);
  WireWriter& index_set(std::span<const Index> sorted);
  WireWriter& sparse_row(std::span<const Index> sorted_cols,
                         std::span<const Value> values);
  WireWriter& quantized(const QuantizedVector& q);
  // Appends the bits of another writer.
  WireWriter& append(const WireWriter& other);

  std::size_t bit_length() const { return bits_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take_bytes() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class WireReader {
 public:
  WireReader(std::vector<std::uint8_t> bytes, std::size_t bit_length);

  std::uint64_t uint(unsigned width);
  std::int64_t sint(unsigned width);
  std::uint64_t varint();
  double real64();
  std::vector<std::uint64_t> uints(std::size_t count, unsigned width);
  std::vector<std::uint64_t> uints_minimal(std::size_t count);
  std::vector<std::int64_t> sints_minimal(std::size_t count);
  std::vector<Index> index_set();
  void sparse_row(std::vector<Index>& cols, std::vector<Value>& values);
  QuantizedVector quantized(std::size_t count);

  std::size_t remaining_bits() const { return bit_length_ - pos_; }
  bool exhausted() const { return pos_ == bit_length_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bit_length_ = 0;
  std::size_t pos_ = 0;
};

struct Message {
  Party sender = Party::kAlice;
  std::vector<std::uint8_t> payload;
  std::size_t bit_length = 0;
  std::string label;
  std::size_t padding_bits() const { return 8 * payload.size() - bit_length; }
};

struct EmptySignal {
  friend bool operator==(const EmptySignal&, const EmptySignal&) = default;
};
struct SampleFailure {
  friend bool operator==(const SampleFailure&, const SampleFailure&) = default;
};
struct EntrySample {
  Index row = 0;
  Index col = 0;
  std::optional<Index> witness;
  friend bool operator==(const EntrySample&, const EntrySample&) = default;
};

using ProtocolResult =
    std::variant<EmptySignal, double, EntrySample, HeavyHitterSet,
                 SampleFailure>;

struct EstimateReport {
  ProtocolResult result;
  std::optional<double> true_value;
  std::uint64_t bits_total = 0;
  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;
  Party output_party = Party::kBob;
  std::string note;

  bool has_scalar() const { return std::holds_alternative<double>(result); }
  double scalar() const { return std::get<double>(result); }
  const EntrySample& sample() const { return std::get<EntrySample>(result); }
  const HeavyHitterSet& heavy_hitters() const {
    return std::get<HeavyHitterSet>(result);
  }
};

class ProtocolSession;

// One party's view of a session: it can only send, receive what the other
// party sent, and draw from its own or the shared randomness.
class Endpoint {
 public:
  Endpoint(ProtocolSession& session, Party party)
      : session_(&session), party_(party) {}

  Party party() const { return party_; }
  void send(WireWriter&& w, std::string label = {});
  WireReader receive();
  Rng& rng();
  // Shared stream for a given draw index; identical at both parties.
  Rng shared(std::uint64_t draw_index);

 private:
  ProtocolSession* session_;
  Party party_;
};

class ProtocolSession {
 public:
  static constexpr std::uint64_t kSeedExchangeBits = 64;

  explicit ProtocolSession(std::uint64_t seed);

  ProtocolSession(const ProtocolSession&) = delete;
  ProtocolSession& operator=(const ProtocolSession&) = delete;

  std::uint64_t seed() const { return seed_; }
  Endpoint alice() { return {*this, Party::kAlice}; }
  Endpoint bob() { return {*this, Party::kBob}; }

  void send(Party sender, WireWriter&& w, std::string label = {});
  // Next message the other party sent that `receiver` has not read yet.
  WireReader receive(Party receiver);

  Rng& private_rng(Party p);
  Rng shared_stream(Party p, std::uint64_t draw_index);
  // n_bits from the party's next shared draw, packed LSB-first.
  std::vector<std::uint8_t> draw_shared_randomness(Party p,
                                                   std::size_t n_bits);

  std::uint64_t rounds() const { return rounds_; }
  std::uint64_t bits_by(Party p) const {
    return bits_by_party_[static_cast<std::size_t>(p)];
  }
  std::uint64_t message_bits() const { return bits_by(Party::kAlice) +
                                              bits_by(Party::kBob); }
  std::uint64_t seed_bits() const { return shared_used_ ? kSeedExchangeBits : 0; }
  std::uint64_t bits_total() const { return message_bits() + seed_bits(); }
  std::uint64_t rng_draws(Party p) const {
    return rng_draws_[static_cast<std::size_t>(p)];
  }
  const std::vector<Message>& messages() const { return messages_; }
  bool finished() const { return finished_; }

  // Sequence of (sender byte, 4-byte little-endian payload length, payload).
  std::vector<std::uint8_t> transcript_dump() const;

  EstimateReport finish(Party output_at, ProtocolResult result,
                        std::string note = {});

 private:
  void require_open() const;

  std::uint64_t seed_;
  std::vector<Message> messages_;
  std::uint64_t rounds_ = 0;
  std::array<std::uint64_t, 2> bits_by_party_{0, 0};
  std::array<std::uint64_t, 2> rng_draws_{0, 0};
  std::array<std::size_t, 2> read_cursor_{0, 0};
  std::array<Rng, 2> private_;
  bool shared_used_ = false;
  bool finished_ = false;
};

// 64-bit FNV-1a, used for golden transcript digests.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace mpstat
