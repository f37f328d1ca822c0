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

#include "mpstat/proto_linf_binary.hpp"

#include <algorithm>
#include <cmath>

#include "proto_util.hpp"

namespace mpstat {

using detail::index_width;

// ---- index exchange ------------------------------------------------------

Party list_sender(Index u, Index v) { return u <= v ? Party::kAlice : Party::kBob; }

namespace {

bool exchanged(std::span<const Index> u, std::span<const Index> v, std::size_t j) {
  return u[j] > 0 && v[j] > 0;
}

std::vector<Index> to_counts(const std::vector<std::uint64_t>& raw) {
  return {raw.begin(), raw.end()};
}

std::vector<std::uint64_t> to_wire(const std::vector<Index>& counts) {
  return {counts.begin(), counts.end()};
}

}  // namespace

void write_lists(WireWriter& w, Party self, const SparseIntMatrix& by_item,
                 std::span<const Index> u, std::span<const Index> v,
                 bool with_values) {
  const unsigned width = index_width(by_item.cols());
  const auto& mine = self == Party::kAlice ? u : v;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!exchanged(u, v, j) || list_sender(u[j], v[j]) != self) continue;
    const auto row = by_item.row(static_cast<Index>(j));
    if (static_cast<Index>(row.size()) != mine[j]) {
      throw ProtocolViolation("list length differs from the announced count");
    }
    for (Index c : row.cols) w.uint(static_cast<std::uint64_t>(c), width);
    if (with_values) {
      for (Value x : row.values) w.varint(static_cast<std::uint64_t>(x));
    }
  }
}

void SplitAccumulator::add(Index i, Index j, Value v) {
  if (v != 0) entries_.push_back({i, j, v});
}

SparseIntMatrix SplitAccumulator::build() const {
  std::vector<Triplet> e = entries_;
  std::sort(e.begin(), e.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  std::vector<Triplet> merged;
  for (const Triplet& t : e) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
      merged.back().value += t.value;
    } else {
      merged.push_back(t);
    }
  }
  return SparseIntMatrix::from_triplets(rows_, cols_, std::move(merged), kUnboundedValue);
}

void read_lists(WireReader& r, Party self, const SparseIntMatrix& by_item,
                std::span<const Index> u, std::span<const Index> v,
                Index other_dim, bool with_values, SplitAccumulator& acc) {
  const Party from = other(self);
  const unsigned width = index_width(other_dim);
  const auto& theirs = from == Party::kAlice ? u : v;
  std::vector<Index> idx;
  std::vector<Value> val;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!exchanged(u, v, j) || list_sender(u[j], v[j]) != from) continue;
    const auto count = static_cast<std::size_t>(theirs[j]);
    idx.resize(count);
    val.assign(count, 1);
    for (auto& x : idx) {
      x = static_cast<Index>(r.uint(width));
      if (x >= other_dim) throw ProtocolViolation("list index out of range");
    }
    if (with_values) {
      for (auto& x : val) x = static_cast<Value>(r.varint());
    }
    const auto own = by_item.row(static_cast<Index>(j));
    for (std::size_t s = 0; s < own.size(); ++s) {
      for (std::size_t t = 0; t < count; ++t) {
        const Value prod = own.values[s] * val[t];
        // Alice's own list holds rows of C, Bob's holds columns.
        if (self == Party::kAlice) {
          acc.add(own.cols[s], idx[t], prod);
        } else {
          acc.add(idx[t], own.cols[s], prod);
        }
      }
    }
  }
}

AdditiveSplit index_exchange(const SparseIntMatrix& a_sub,
                             const SparseIntMatrix& b, ProtocolSession& session,
                             bool with_values) {
  detail::require_compatible(a_sub, b);
  if (!with_values) {
    detail::require_binary(a_sub, "A");
    detail::require_binary(b, "B");
  }
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const std::size_t n = static_cast<std::size_t>(b.rows());

  const SparseIntMatrix at = a_sub.transpose();
  const std::vector<Index> u_alice = column_counts(a_sub);
  {
    WireWriter w;
    w.uints_minimal(to_wire(u_alice));
    alice.send(std::move(w), "ix.alice_counts");
  }
  WireReader r1 = bob.receive();
  const std::vector<Index> u_bob = to_counts(r1.uints_minimal(n));
  const std::vector<Index> v_bob = row_counts(b);
  {
    WireWriter w;
    w.uints_minimal(to_wire(v_bob));
    write_lists(w, Party::kBob, b, u_bob, v_bob, with_values);
    bob.send(std::move(w), "ix.bob_counts_lists");
  }
  WireReader r2 = alice.receive();
  const std::vector<Index> v_alice = to_counts(r2.uints_minimal(n));
  SplitAccumulator acc_a(a_sub.rows(), b.cols());
  read_lists(r2, Party::kAlice, at, u_alice, v_alice, b.cols(), with_values, acc_a);
  {
    WireWriter w;
    write_lists(w, Party::kAlice, at, u_alice, v_alice, with_values);
    alice.send(std::move(w), "ix.alice_lists");
  }
  WireReader r3 = bob.receive();
  SplitAccumulator acc_b(a_sub.rows(), b.cols());
  read_lists(r3, Party::kBob, b, u_bob, v_bob, a_sub.rows(), with_values, acc_b);

  AdditiveSplit out;
  out.c_a = acc_a.build();
  out.c_b = acc_b.build();
  out.owner.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.owner[j] = list_sender(u_bob[j], v_bob[j]);
  return out;
}

// ---- level scheme shared by both max-entry protocols ------------------------

namespace {

// Nested per-entry subsampling: entry e survives level l iff its uniform
// u_e < base^-l, so level l+1 keeps a subset of level l.
struct LevelSampling {
  double base = 2.0;
  std::int64_t top = 0;                 // L
  std::vector<std::int64_t> entry_level;  // per triplet of the sampled matrix
  std::vector<Triplet> entries;

  double prob(std::int64_t l) const { return std::pow(base, -static_cast<double>(l)); }

  static LevelSampling make(const SparseIntMatrix& a, double base, std::uint64_t key) {
    LevelSampling s;
    s.base = base;
    s.entries = a.triplets();
    const auto mass = static_cast<double>(s.entries.size());
    s.top = mass <= 1.0 ? 0
                        : static_cast<std::int64_t>(std::ceil(std::log(mass) / std::log(base) - 1e-12));
    s.entry_level.reserve(s.entries.size());
    const double log_base = std::log(base);
    for (const Triplet& t : s.entries) {
      const double u = to_unit(prf(key, static_cast<std::uint64_t>(t.row),
                                   static_cast<std::uint64_t>(t.col)));
      std::int64_t l = s.top;
      if (u > 0.0) {
        l = std::min<std::int64_t>(s.top, static_cast<std::int64_t>(std::floor(-std::log(u) / log_base)));
        while (l > 0 && !(u < s.prob(l))) --l;
        while (l < s.top && u < s.prob(l + 1)) ++l;
      }
      s.entry_level.push_back(l);
    }
    return s;
  }

  std::vector<std::uint64_t> column_counts_at(std::int64_t l, Index cols) const {
    std::vector<std::uint64_t> c(static_cast<std::size_t>(cols), 0);
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (entry_level[e] >= l) ++c[static_cast<std::size_t>(entries[e].col)];
    }
    return c;
  }

  SparseIntMatrix at_level(std::int64_t l, Index rows, Index cols) const {
    std::vector<Triplet> kept;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      if (entry_level[e] >= l) kept.push_back(entries[e]);
    }
    return SparseIntMatrix::from_triplets(rows, cols, std::move(kept));
  }
};

void write_levels(WireWriter& w, const LevelSampling& s, Index cols) {
  w.varint(static_cast<std::uint64_t>(s.top));
  for (std::int64_t l = 0; l <= s.top; ++l) w.uints_minimal(s.column_counts_at(l, cols));
}

// Bob: reads the level block and returns per-level column counts.
std::vector<std::vector<Index>> read_levels(WireReader& r, Index cols) {
  const auto top = static_cast<std::int64_t>(r.varint());
  if (top > 4096) throw ProtocolViolation("implausible level count");
  std::vector<std::vector<Index>> out;
  for (std::int64_t l = 0; l <= top; ++l) {
    out.push_back(to_counts(r.uints_minimal(static_cast<std::size_t>(cols))));
  }
  return out;
}

double l1_through(const std::vector<Index>& colsum, const std::vector<Index>& rowsum) {
  Wide s = 0;
  for (std::size_t j = 0; j < colsum.size(); ++j) s += static_cast<Wide>(colsum[j]) * rowsum[j];
  return static_cast<double>(s);
}

// Rounds 2 and 3 once Bob holds the level column counts: Bob picks l* and
// ships his lists, Alice ships hers with ||C_A||_inf. Returns the larger max
// entry seen on either side, scaled by 1 / p_{l*}.
double levels_to_split(const SparseIntMatrix& a, const SparseIntMatrix& b,
                       const LevelSampling& alice_levels,
                       const std::vector<std::vector<Index>>& bob_counts,
                       double threshold, Endpoint& alice, Endpoint& bob,
                       LinfTrace* trace) {
  const Index n = b.rows();
  const std::vector<Index> v = row_counts(b);
  std::vector<double> l1;
  for (const auto& c : bob_counts) l1.push_back(l1_through(c, v));
  std::int64_t chosen = static_cast<std::int64_t>(bob_counts.size()) - 1;
  for (std::size_t l = 0; l < l1.size(); ++l) {
    if (l1[l] <= threshold) {
      chosen = static_cast<std::int64_t>(l);
      break;
    }
  }
  const std::vector<Index>& u_bob = bob_counts[static_cast<std::size_t>(chosen)];
  {
    WireWriter w;
    w.varint(static_cast<std::uint64_t>(chosen));
    w.uints_minimal(to_wire(v));
    write_lists(w, Party::kBob, b, u_bob, v, false);
    bob.send(std::move(w), "linf.level_counts_lists");
  }

  WireReader r2 = alice.receive();
  const auto l_star = static_cast<std::int64_t>(r2.varint());
  if (l_star > alice_levels.top) throw ProtocolViolation("level out of range");
  const std::vector<Index> v_alice = to_counts(r2.uints_minimal(static_cast<std::size_t>(n)));
  const SparseIntMatrix a_star = alice_levels.at_level(l_star, a.rows(), a.cols());
  const SparseIntMatrix at = a_star.transpose();
  const std::vector<Index> u_alice = column_counts(a_star);
  SplitAccumulator acc_a(a.rows(), b.cols());
  read_lists(r2, Party::kAlice, at, u_alice, v_alice, b.cols(), false, acc_a);
  SparseIntMatrix c_a = acc_a.build();
  {
    WireWriter w;
    write_lists(w, Party::kAlice, at, u_alice, v_alice, false);
    w.varint(static_cast<std::uint64_t>(linf_norm(c_a)));
    alice.send(std::move(w), "linf.alice_lists_max");
  }

  WireReader r3 = bob.receive();
  SplitAccumulator acc_b(a.rows(), b.cols());
  read_lists(r3, Party::kBob, b, u_bob, v, a.rows(), false, acc_b);
  SparseIntMatrix c_b = acc_b.build();
  const auto max_a = static_cast<Value>(r3.varint());
  const double best = static_cast<double>(std::max(max_a, linf_norm(c_b)));

  if (trace != nullptr) {
    trace->level_l1 = l1;
    trace->level_probs.clear();
    for (std::size_t l = 0; l < l1.size(); ++l) {
      trace->level_probs.push_back(alice_levels.prob(static_cast<std::int64_t>(l)));
    }
    trace->threshold = threshold;
    trace->chosen_level = l_star;
    trace->sampled_a = a_star;
    trace->split.c_a = std::move(c_a);
    trace->split.c_b = std::move(c_b);
    trace->split.owner.resize(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
      trace->split.owner[static_cast<std::size_t>(j)] =
          list_sender(u_bob[static_cast<std::size_t>(j)], v[static_cast<std::size_t>(j)]);
    }
  }
  return best / alice_levels.prob(l_star);
}

}  // namespace

void LinfParams::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("eps must lie in (0, 1)");
  if (!(c_gamma > 0.0)) throw InvalidInput("c_gamma must be positive");
}

EstimateReport run_linf_2eps(const SparseIntMatrix& a, const SparseIntMatrix& b,
                             const LinfParams& params, ProtocolSession& session,
                             LinfTrace* trace) {
  params.validate();
  detail::require_compatible(a, b);
  detail::require_binary(a, "A");
  detail::require_binary(b, "B");
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const double gamma = params.c_gamma * detail::log_n_of(a, b) / (params.eps * params.eps);
  const double threshold = gamma * static_cast<double>(a.rows()) * static_cast<double>(b.cols());

  const LevelSampling levels = LevelSampling::make(a, 1.0 + params.eps, alice.rng().next());
  {
    WireWriter w;
    write_levels(w, levels, a.cols());
    alice.send(std::move(w), "linf.level_colsums");
  }
  WireReader r1 = bob.receive();
  const auto counts = read_levels(r1, b.rows());
  const double out = levels_to_split(a, b, levels, counts, threshold, alice, bob, trace);
  return session.finish(Party::kBob, out);
}

void UniverseSampleParams::validate(Index n) const {
  if (!(kappa >= 4.0 && kappa <= static_cast<double>(n))) {
    throw InvalidInput("kappa must lie in [4, n]");
  }
  if (!(c_alpha > 0.0)) throw InvalidInput("c_alpha must be positive");
}

EstimateReport run_linf_kappa(const SparseIntMatrix& a, const SparseIntMatrix& b,
                              const UniverseSampleParams& params,
                              ProtocolSession& session, KappaTrace* trace) {
  detail::require_compatible(a, b);
  detail::require_binary(a, "A");
  detail::require_binary(b, "B");
  const Index n = std::max({a.rows(), a.cols(), b.cols()});
  params.validate(n);
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const double alpha = params.c_alpha * detail::log_n_of(a, b);
  const double q = std::min(alpha / params.kappa, 1.0);

  // Universe sampling: keep each inner item (column of A) with probability q.
  std::vector<Index> kept;
  std::vector<Triplet> sampled;
  {
    Rng& rng = alice.rng();
    std::vector<char> keep(static_cast<std::size_t>(a.cols()), 0);
    for (Index j = 0; j < a.cols(); ++j) {
      if (rng.bernoulli(q)) {
        keep[static_cast<std::size_t>(j)] = 1;
        kept.push_back(j);
      }
    }
    for (const Triplet& t : a.triplets()) {
      if (keep[static_cast<std::size_t>(t.col)]) sampled.push_back(t);
    }
  }
  const SparseIntMatrix a_prime =
      SparseIntMatrix::from_triplets(a.rows(), a.cols(), std::move(sampled));
  const LevelSampling levels = LevelSampling::make(a_prime, 2.0, alice.rng().next());
  {
    WireWriter w;
    w.uints_minimal(to_wire(column_counts(a)));
    write_levels(w, levels, a.cols());
    alice.send(std::move(w), "linfk.colsums_levels");
  }

  WireReader r1 = bob.receive();
  const std::vector<Index> full = to_counts(r1.uints_minimal(static_cast<std::size_t>(b.rows())));
  const auto counts = read_levels(r1, b.rows());
  const std::vector<Index> v = row_counts(b);
  if (trace != nullptr) {
    trace->q = q;
    trace->kept_columns = kept;
  }
  if (l1_through(counts[0], v) == 0.0) {
    if (trace != nullptr) trace->d_zero = true;
    const double c1 = l1_through(full, v);
    return session.finish(Party::kBob, c1 == 0.0 ? 0.0 : 1.0, "sampled product is zero");
  }
  const double threshold = alpha / params.kappa * static_cast<double>(a.rows()) *
                           static_cast<double>(b.cols());
  const double best = levels_to_split(a_prime, b, levels, counts, threshold, alice, bob,
                                      trace != nullptr ? &trace->levels : nullptr);
  return session.finish(Party::kBob, best / q);
}

}  // namespace mpstat
