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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace mpstat {

const char* party_name(Party p) { return p == Party::kAlice ? "alice" : "bob"; }

unsigned bit_width_u64(std::uint64_t v) {
  return static_cast<unsigned>(std::bit_width(v));
}

double QuantizedVector::value(std::size_t k) const {
  return std::ldexp(static_cast<double>(mantissas[k]), exponent);
}

// ---- WireWriter ----------------------------------------------------------

WireWriter& WireWriter::uint(std::uint64_t v, unsigned width) {
  if (width > 64) throw ProtocolViolation("field width above 64");
  if (width < 64 && (v >> width) != 0) {
    throw ProtocolViolation("value does not fit declared field width");
  }
  if (width == 0) return *this;
  const std::size_t first = bits_ / 8;
  const unsigned offset = static_cast<unsigned>(bits_ % 8);
  const unsigned touched = (offset + width + 7) / 8;
  while (bytes_.size() < first + touched) bytes_.push_back(0);
  const unsigned __int128 chunk = static_cast<unsigned __int128>(v) << offset;
  for (unsigned k = 0; k < touched; ++k) {
    bytes_[first + k] |= static_cast<std::uint8_t>(chunk >> (8 * k));
  }
  bits_ += width;
  return *this;
}

WireWriter& WireWriter::sint(std::int64_t v, unsigned width) {
  return uint(zigzag(v), width);
}

WireWriter& WireWriter::varint(std::uint64_t v) {
  do {
    std::uint64_t group = v & 0x7F;
    v >>= 7;
    if (v != 0) group |= 0x80;
    uint(group, 8);
  } while (v != 0);
  return *this;
}

WireWriter& WireWriter::real64(double v) {
  return uint(std::bit_cast<std::uint64_t>(v), 64);
}

WireWriter& WireWriter::uints(std::span<const std::uint64_t> v,
                              unsigned width) {
  for (std::uint64_t x : v) uint(x, width);
  return *this;
}

WireWriter& WireWriter::uints_minimal(std::span<const std::uint64_t> v) {
  std::uint64_t mx = 0;
  for (std::uint64_t x : v) mx = std::max(mx, x);
  const unsigned width = bit_width_u64(mx);
  uint(width, 7);
  return uints(v, width);
}

WireWriter& WireWriter::sints_minimal(std::span<const std::int64_t> v) {
  std::vector<std::uint64_t> z(v.size());
  std::transform(v.begin(), v.end(), z.begin(),
                 [](std::int64_t x) { return zigzag(x); });
  return uints_minimal(z);
}

WireWriter& WireWriter::index_set(std::span<const Index> sorted) {
  varint(sorted.size());
  Index prev = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k] < 0 || (k > 0 && sorted[k] <= prev)) {
      throw ProtocolViolation("index set must be strictly increasing");
    }
    varint(static_cast<std::uint64_t>(k == 0 ? sorted[k] : sorted[k] - prev));
    prev = sorted[k];
  }
  return *this;
}

WireWriter& WireWriter::sparse_row(std::span<const Index> sorted_cols,
                                   std::span<const Value> values) {
  if (sorted_cols.size() != values.size()) {
    throw ProtocolViolation("sparse row: index/value count mismatch");
  }
  index_set(sorted_cols);
  for (Value v : values) varint(static_cast<std::uint64_t>(v));
  return *this;
}

WireWriter& WireWriter::quantized(const QuantizedVector& q) {
  uint(zigzag(q.exponent), 16);
  for (std::int32_t m : q.mantissas) uint(static_cast<std::uint32_t>(m), 32);
  return *this;
}

WireWriter& WireWriter::append(const WireWriter& other) {
  std::size_t left = other.bits_;
  for (std::uint8_t byte : other.bytes_) {
    const auto take = static_cast<unsigned>(std::min<std::size_t>(8, left));
    uint(byte & ((1U << take) - 1), take);
    left -= take;
  }
  return *this;
}

// ---- WireReader ----------------------------------------------------------

WireReader::WireReader(std::vector<std::uint8_t> bytes, std::size_t bit_length)
    : bytes_(std::move(bytes)), bit_length_(bit_length) {}

std::uint64_t WireReader::uint(unsigned width) {
  if (width > 64) throw ProtocolViolation("field width above 64");
  if (pos_ + width > bit_length_) {
    throw ProtocolViolation("decode past end of message");
  }
  if (width == 0) return 0;
  const std::size_t first = pos_ / 8;
  const unsigned offset = static_cast<unsigned>(pos_ % 8);
  const unsigned touched = (offset + width + 7) / 8;
  unsigned __int128 chunk = 0;
  for (unsigned k = 0; k < touched; ++k) {
    chunk |= static_cast<unsigned __int128>(bytes_[first + k]) << (8 * k);
  }
  pos_ += width;
  chunk >>= offset;
  return width == 64 ? static_cast<std::uint64_t>(chunk)
                     : static_cast<std::uint64_t>(chunk) & ((1ULL << width) - 1);
}

std::int64_t WireReader::sint(unsigned width) { return unzigzag(uint(width)); }

std::uint64_t WireReader::varint() {
  std::uint64_t v = 0;
  for (unsigned shift = 0;; shift += 7) {
    if (shift > 63) throw ProtocolViolation("varint too long");
    const std::uint64_t group = uint(8);
    v |= (group & 0x7F) << shift;
    if ((group & 0x80) == 0) break;
  }
  return v;
}

double WireReader::real64() { return std::bit_cast<double>(uint(64)); }

std::vector<std::uint64_t> WireReader::uints(std::size_t count,
                                              unsigned width) {
  std::vector<std::uint64_t> v(count);
  for (auto& x : v) x = uint(width);
  return v;
}

std::vector<std::uint64_t> WireReader::uints_minimal(std::size_t count) {
  const auto width = static_cast<unsigned>(uint(7));
  return uints(count, width);
}

std::vector<std::int64_t> WireReader::sints_minimal(std::size_t count) {
  const auto z = uints_minimal(count);
  std::vector<std::int64_t> v(count);
  std::transform(z.begin(), z.end(), v.begin(), unzigzag);
  return v;
}

std::vector<Index> WireReader::index_set() {
  const std::uint64_t count = varint();
  if (count > remaining_bits()) throw ProtocolViolation("index set too long");
  std::vector<Index> out;
  out.reserve(count);
  Index prev = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto d = static_cast<Index>(varint());
    prev = (k == 0) ? d : prev + d;
    out.push_back(prev);
  }
  return out;
}

void WireReader::sparse_row(std::vector<Index>& cols,
                            std::vector<Value>& values) {
  cols = index_set();
  values.resize(cols.size());
  for (auto& v : values) v = static_cast<Value>(varint());
}

QuantizedVector WireReader::quantized(std::size_t count) {
  QuantizedVector q;
  q.exponent = static_cast<std::int32_t>(unzigzag(uint(16)));
  q.mantissas.resize(count);
  for (auto& m : q.mantissas) {
    m = static_cast<std::int32_t>(static_cast<std::uint32_t>(uint(32)));
  }
  return q;
}

// ---- Endpoint / session --------------------------------------------------

void Endpoint::send(WireWriter&& w, std::string label) {
  session_->send(party_, std::move(w), std::move(label));
}
WireReader Endpoint::receive() { return session_->receive(party_); }
Rng& Endpoint::rng() { return session_->private_rng(party_); }
Rng Endpoint::shared(std::uint64_t draw_index) {
  return session_->shared_stream(party_, draw_index);
}

ProtocolSession::ProtocolSession(std::uint64_t seed)
    : seed_(seed),
      private_{Rng(prf(seed, 0x5052495641544541ULL)),
               Rng(prf(seed, 0x5052495641544542ULL))} {}

void ProtocolSession::require_open() const {
  if (finished_) throw ProtocolViolation("session already finished");
}

void ProtocolSession::send(Party sender, WireWriter&& w, std::string label) {
  require_open();
  Message m;
  m.sender = sender;
  m.bit_length = w.bit_length();
  m.payload = w.take_bytes();
  m.label = std::move(label);
  if (messages_.empty() || messages_.back().sender != sender) ++rounds_;
  bits_by_party_[static_cast<std::size_t>(sender)] += m.bit_length;
  messages_.push_back(std::move(m));
}

WireReader ProtocolSession::receive(Party receiver) {
  require_open();
  auto& cursor = read_cursor_[static_cast<std::size_t>(receiver)];
  while (cursor < messages_.size() && messages_[cursor].sender == receiver) {
    ++cursor;
  }
  if (cursor >= messages_.size()) {
    throw ProtocolViolation(std::string(party_name(receiver)) +
                            " has no pending message");
  }
  const Message& m = messages_[cursor++];
  return WireReader(m.payload, m.bit_length);
}

Rng& ProtocolSession::private_rng(Party p) {
  return private_[static_cast<std::size_t>(p)];
}

Rng ProtocolSession::shared_stream(Party p, std::uint64_t draw_index) {
  require_open();
  shared_used_ = true;
  ++rng_draws_[static_cast<std::size_t>(p)];
  return Rng(prf(seed_, 0x5348415245440000ULL, draw_index));
}

std::vector<std::uint8_t> ProtocolSession::draw_shared_randomness(
    Party p, std::size_t n_bits) {
  const std::uint64_t index = rng_draws_[static_cast<std::size_t>(p)];
  Rng stream = shared_stream(p, index);
  std::vector<std::uint8_t> out((n_bits + 7) / 8, 0);
  std::uint64_t word = 0;
  for (std::size_t b = 0; b < n_bits; ++b) {
    if (b % 64 == 0) word = stream.next();
    if ((word >> (b % 64)) & 1U) out[b / 8] |= static_cast<std::uint8_t>(1U << (b % 8));
  }
  return out;
}

std::vector<std::uint8_t> ProtocolSession::transcript_dump() const {
  std::vector<std::uint8_t> out;
  for (const Message& m : messages_) {
    out.push_back(static_cast<std::uint8_t>(m.sender));
    const auto len = static_cast<std::uint32_t>(m.payload.size());
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(len >> (8 * b)));
    out.insert(out.end(), m.payload.begin(), m.payload.end());
  }
  return out;
}

EstimateReport ProtocolSession::finish(Party output_at, ProtocolResult result,
                                       std::string note) {
  require_open();
  finished_ = true;
  EstimateReport r;
  r.result = std::move(result);
  r.bits_total = bits_total();
  r.rounds = rounds_;
  r.seed = seed_;
  r.output_party = output_at;
  r.note = std::move(note);
  return r;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace mpstat
