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

#include "mpstat/proto_hh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mpstat/proto_lp.hpp"
#include "proto_util.hpp"

namespace mpstat {

using detail::index_width;

namespace {

void check_phi_eps(double phi, double eps, double p) {
  if (!(phi > 0.0 && phi <= 1.0)) throw InvalidInput("phi must lie in (0, 1]");
  if (!(eps > 0.0 && eps <= phi)) throw InvalidInput("eps must lie in (0, phi]");
  if (!(p > 0.0 && p <= 2.0)) throw InvalidInput("p must lie in (0, 2]");
}

std::vector<std::uint64_t> wire_counts(const std::vector<Index>& c) {
  return {c.begin(), c.end()};
}

std::vector<Index> read_counts(WireReader& r, Index n) {
  const auto raw = r.uints_minimal(static_cast<std::size_t>(n));
  return {raw.begin(), raw.end()};
}

void write_positions(WireWriter& w, const std::vector<EntryPos>& pos, Index rows,
                     Index cols) {
  w.varint(pos.size());
  for (const auto& [i, j] : pos) {
    w.uint(static_cast<std::uint64_t>(i), index_width(rows));
    w.uint(static_cast<std::uint64_t>(j), index_width(cols));
  }
}

std::vector<EntryPos> read_positions(WireReader& r, Index rows, Index cols) {
  const std::uint64_t count = r.varint();
  if (count > r.remaining_bits()) throw ProtocolViolation("position list too long");
  std::vector<EntryPos> out(count);
  for (auto& [i, j] : out) {
    i = static_cast<Index>(r.uint(index_width(rows)));
    j = static_cast<Index>(r.uint(index_width(cols)));
    if (i >= rows || j >= cols) throw ProtocolViolation("position out of range");
  }
  return out;
}

LpProtocolParams norm_params(double p, double eps, int boost, double c_rho,
                             double sketch_c) {
  LpProtocolParams lp;
  lp.p = p;
  lp.eps = eps;
  lp.boost_reps = boost;
  lp.c_rho = c_rho;
  lp.sketch_c = sketch_c;
  return lp;
}

Index dim_of(const SparseIntMatrix& a, const SparseIntMatrix& b) {
  return std::max({a.rows(), a.cols(), b.cols(), Index{2}});
}

}  // namespace

// ---- integer inputs --------------------------------------------------------

void HHGeneralParams::validate() const {
  check_phi_eps(phi, eps, p);
  if (!(c > 0.0)) throw InvalidInput("c must be positive");
  if (norm_boost < 1 || norm_boost % 2 == 0) {
    throw InvalidInput("norm_boost must be a positive odd integer");
  }
}

// A heavy entry keeps about 8 c ln n (phi/eps)^2 units after thinning,
// whatever p is.
double HHGeneralParams::rate(double norm_pow, Index n) const {
  if (!(norm_pow > 0.0)) return 1.0;
  const double r = phi / eps;
  const double units = 8.0 * c * std::log(static_cast<double>(std::max<Index>(n, 2))) * r * r;
  return std::min(units / std::pow(phi * norm_pow, 1.0 / p), 1.0);
}

// p = 1 gives rate * eps/8 * N. In general the drop threshold is an eps/(8 phi)
// fraction of the linear heavy level (phi N)^(1/p); for p <= 2 that stays
// below half of the gap to the output threshold.
double HHGeneralParams::alice_threshold(double norm_pow, double rate) const {
  return rate * eps / (8.0 * phi) * std::pow(phi * norm_pow, 1.0 / p);
}

double HHGeneralParams::output_threshold(double norm_pow, double rate) const {
  return rate * std::pow((phi - eps / 2.0) * norm_pow, 1.0 / p);
}

SparseIntMatrix thin_units(const SparseIntMatrix& a, double rate, Rng& rng) {
  if (rate >= 1.0) return a;
  std::vector<Triplet> kept;
  for (Triplet t : a.triplets()) {
    t.value = rng.binomial(t.value, rate);
    if (t.value != 0) kept.push_back(t);
  }
  return SparseIntMatrix::from_triplets(a.rows(), a.cols(), std::move(kept),
                                        a.max_value());
}

EstimateReport run_hh_general(const SparseIntMatrix& a, const SparseIntMatrix& b,
                              const HHGeneralParams& params,
                              ProtocolSession& session, HHGeneralTrace* trace) {
  params.validate();
  detail::require_compatible(a, b);
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const Index n = dim_of(a, b);
  HeavyHitterSet out;
  out.phi = params.phi;
  out.eps = params.eps;

  // Norm phase. Alice ends up with `norm_alice` and a writer for her next
  // message; Bob with `norm_bob`.
  double norm_alice = 0.0;
  double norm_bob = 0.0;
  WireWriter w_alice;
  if (params.p == 1.0) {
    {
      WireWriter w;
      w.uints_minimal(detail::as_unsigned(row_sums(b)));
      bob.send(std::move(w), "hh.row_sums");
    }
    WireReader r = alice.receive();
    const auto rs = r.uints_minimal(static_cast<std::size_t>(b.rows()));
    const auto cs = column_sums(a);
    Wide total = 0;
    for (std::size_t k = 0; k < rs.size(); ++k) {
      total += static_cast<Wide>(cs[k]) * static_cast<Wide>(rs[k]);
    }
    if (total > static_cast<Wide>(std::numeric_limits<std::uint64_t>::max())) {
      throw InvalidInput("||AB||_1 exceeds 64 bits");
    }
    w_alice.varint(static_cast<std::uint64_t>(total));
    norm_alice = static_cast<double>(static_cast<std::uint64_t>(total));
  } else {
    norm_bob = lp_estimate_rounds(
        a, b,
        norm_params(params.p, params.norm_accuracy(), params.norm_boost,
                    params.norm_c_rho, params.norm_sketch_c),
        session);
    if (!(norm_bob > 0.0)) return session.finish(Party::kBob, out, "zero norm");
    WireWriter w;
    w.real64(norm_bob);
    bob.send(std::move(w), "hh.norm");
    norm_alice = alice.receive().real64();
  }

  // Alice: thin, announce counts.
  const double rate = params.rate(norm_alice, n);
  const SparseIntMatrix a_thin =
      norm_alice > 0.0 ? thin_units(a, rate, alice.rng()) : SparseIntMatrix::zeros(a.rows(), a.cols());
  const SparseIntMatrix at = a_thin.transpose();
  const std::vector<Index> u_alice = column_counts(a_thin);
  w_alice.uints_minimal(wire_counts(u_alice));
  alice.send(std::move(w_alice), "hh.norm_counts");

  WireReader r_bob = bob.receive();
  if (params.p == 1.0) {
    norm_bob = static_cast<double>(r_bob.varint());
    if (!(norm_bob > 0.0)) return session.finish(Party::kBob, out, "zero norm");
  }
  const std::vector<Index> u_bob = read_counts(r_bob, b.rows());
  const std::vector<Index> v_bob = row_counts(b);
  {
    WireWriter w;
    w.uints_minimal(wire_counts(v_bob));
    w.uint(b.is_binary() ? 0 : 1, 1);
    write_lists(w, Party::kBob, b, u_bob, v_bob, !b.is_binary());
    bob.send(std::move(w), "hh.counts_lists");
  }

  // Alice: her share, then her lists and the large entries of C_A.
  WireReader r_alice = alice.receive();
  const std::vector<Index> v_alice = read_counts(r_alice, b.rows());
  const bool bob_values = r_alice.uint(1) != 0;
  SplitAccumulator acc_a(a.rows(), b.cols());
  read_lists(r_alice, Party::kAlice, at, u_alice, v_alice, b.cols(), bob_values, acc_a);
  const SparseIntMatrix c_a = acc_a.build();
  const double t_alice = params.alice_threshold(norm_alice, rate);
  std::vector<Triplet> shipped;
  for (const Triplet& t : c_a.triplets()) {
    if (static_cast<double>(t.value) > t_alice) shipped.push_back(t);
  }
  {
    WireWriter w;
    w.uint(a_thin.is_binary() ? 0 : 1, 1);
    write_lists(w, Party::kAlice, at, u_alice, v_alice, !a_thin.is_binary());
    w.varint(shipped.size());
    for (const Triplet& t : shipped) {
      w.uint(static_cast<std::uint64_t>(t.row), index_width(a.rows()));
      w.uint(static_cast<std::uint64_t>(t.col), index_width(b.cols()));
      w.varint(static_cast<std::uint64_t>(t.value));
    }
    alice.send(std::move(w), "hh.lists_heavy");
  }

  // Bob: C' = C'_A + C_B.
  WireReader r_last = bob.receive();
  const bool alice_values = r_last.uint(1) != 0;
  SplitAccumulator acc_b(a.rows(), b.cols());
  read_lists(r_last, Party::kBob, b, u_bob, v_bob, a.rows(), alice_values, acc_b);
  const SparseIntMatrix c_b = acc_b.build();
  SplitAccumulator merged(a.rows(), b.cols());
  for (const Triplet& t : c_b.triplets()) merged.add(t.row, t.col, t.value);
  const std::uint64_t count = r_last.varint();
  if (count > r_last.remaining_bits()) throw ProtocolViolation("entry list too long");
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto i = static_cast<Index>(r_last.uint(index_width(a.rows())));
    const auto j = static_cast<Index>(r_last.uint(index_width(b.cols())));
    const auto v = static_cast<Value>(r_last.varint());
    if (i >= a.rows() || j >= b.cols()) throw ProtocolViolation("entry out of range");
    merged.add(i, j, v);
  }
  const double rate_bob = params.rate(norm_bob, n);
  const double beta_bob = params.beta(norm_bob, n);
  const double t_out = params.output_threshold(norm_bob, rate_bob);
  for (const Triplet& t : merged.build().triplets()) {
    if (static_cast<double>(t.value) >= t_out) out.pairs.insert({t.row, t.col});
  }

  if (trace != nullptr) {
    trace->norm_pow = norm_bob;
    trace->beta = beta_bob;
    trace->rate = rate_bob;
    trace->thinned_a = a_thin;
    trace->split.c_a = c_a;
    trace->split.c_b = c_b;
    trace->split.owner.resize(static_cast<std::size_t>(b.rows()));
    for (std::size_t k = 0; k < u_bob.size(); ++k) {
      trace->split.owner[k] = list_sender(u_bob[k], v_bob[k]);
    }
    trace->shipped = shipped;
    trace->alice_threshold = t_alice;
    trace->output_threshold = t_out;
  }
  return session.finish(Party::kBob, out);
}

// ---- binary inputs -------------------------------------------------------

void HHBinaryParams::validate() const {
  check_phi_eps(phi, eps, p);
  if (!(c > 0.0 && c_bypass >= 0.0 && c_verify > 0.0 && candidate_divisor > 0.0)) {
    throw InvalidInput("constants must be positive");
  }
  if (norm_boost < 1 || norm_boost % 2 == 0) {
    throw InvalidInput("norm_boost must be a positive odd integer");
  }
}

// The same estimate drives sampling (a factor 2 suffices) and acceptance,
// which needs 1 + eps/(4 phi).
double HHBinaryParams::norm_accuracy() const {
  return std::min(0.5, eps / (4.0 * phi));
}

double HHBinaryParams::beta(double norm_pow, Index n) const {
  if (!(norm_pow > 0.0)) return 1.0;
  const double ln_n = std::log(static_cast<double>(std::max<Index>(n, 2)));
  return std::min(std::pow(c * ln_n / (phi * norm_pow), 1.0 / p), 1.0);
}

bool HHBinaryParams::bypass(double norm_pow, Index n) const {
  const double ln_n = std::log(static_cast<double>(std::max<Index>(n, 2)));
  return norm_pow < c_bypass * phi * ln_n / (eps * eps);
}

double HHBinaryParams::verify_threshold(double norm_pow, double beta) const {
  return std::pow(beta, p) * phi * norm_pow / candidate_divisor;
}

std::size_t HHBinaryParams::verify_samples(Index n) const {
  const double r = phi / eps;
  const double ln_n = std::log(static_cast<double>(std::max<Index>(n, 2)));
  return static_cast<std::size_t>(std::ceil(c_verify * r * r * ln_n));
}

namespace {

constexpr std::uint64_t kVerifyStream = 0x4848;

std::vector<EntryPos> candidates_of(const SparseIntMatrix& part, double p,
                                    double threshold) {
  std::vector<EntryPos> out;
  for (const Triplet& t : part.triplets()) {
    if (std::pow(static_cast<double>(t.value), p) >= threshold) {
      out.emplace_back(t.row, t.col);
    }
  }
  return out;
}

// Coordinates both parties inspect; empty means all of them.
std::vector<Index> verify_coords(Endpoint& self, std::size_t samples, Index inner) {
  if (samples >= static_cast<std::size_t>(inner)) return {};
  Rng rng = self.shared(kVerifyStream);
  std::vector<Index> k(samples);
  for (auto& x : k) x = static_cast<Index>(rng.below(static_cast<std::uint64_t>(inner)));
  return k;
}

}  // namespace

EstimateReport run_hh_binary(const SparseIntMatrix& a, const SparseIntMatrix& b,
                             const HHBinaryParams& params, ProtocolSession& session,
                             HHBinaryTrace* trace) {
  params.validate();
  detail::require_compatible(a, b);
  detail::require_binary(a, "A");
  detail::require_binary(b, "B");
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const Index n = dim_of(a, b);
  const Index inner = b.rows();
  HeavyHitterSet out;
  out.phi = params.phi;
  out.eps = params.eps;

  // Step 1: the l_p estimate lands at Bob, who returns it with his counts.
  const double norm_bob = lp_estimate_rounds(
      a, b,
      norm_params(params.p, params.norm_accuracy(), params.norm_boost,
                  params.norm_c_rho, params.norm_sketch_c),
      session);
  if (!(norm_bob > 0.0)) return session.finish(Party::kBob, out, "zero norm");
  const std::vector<Index> v_bob = row_counts(b);
  {
    WireWriter w;
    w.real64(norm_bob);
    w.uints_minimal(wire_counts(v_bob));
    bob.send(std::move(w), "hhb.norm_counts");
  }

  // Step 2, Alice: column sampling, then her counts and lists.
  WireReader r1 = alice.receive();
  const double norm_alice = r1.real64();
  const std::vector<Index> v_alice = read_counts(r1, inner);
  const bool bypassed = params.bypass(norm_alice, n);
  const double beta = bypassed ? 1.0 : params.beta(norm_alice, n);
  std::vector<Index> kept;
  std::vector<Triplet> a_kept;
  {
    std::vector<char> keep(static_cast<std::size_t>(a.cols()), 1);
    if (beta < 1.0) {
      for (auto& k : keep) k = alice.rng().bernoulli(beta) ? 1 : 0;
    }
    for (Index k = 0; k < a.cols(); ++k) {
      if (keep[static_cast<std::size_t>(k)]) kept.push_back(k);
    }
    for (const Triplet& t : a.triplets()) {
      if (keep[static_cast<std::size_t>(t.col)]) a_kept.push_back(t);
    }
  }
  const SparseIntMatrix a_sub = SparseIntMatrix::from_triplets(a.rows(), a.cols(), std::move(a_kept));
  const SparseIntMatrix at = a_sub.transpose();
  const std::vector<Index> u_alice = column_counts(a_sub);
  {
    WireWriter w;
    w.uints_minimal(wire_counts(u_alice));
    write_lists(w, Party::kAlice, at, u_alice, v_alice, false);
    alice.send(std::move(w), "hhb.counts_lists");
  }

  // Bob: C_B, his lists and his candidates.
  WireReader r2 = bob.receive();
  const std::vector<Index> u_bob = read_counts(r2, inner);
  SplitAccumulator acc_b(a.rows(), b.cols());
  read_lists(r2, Party::kBob, b, u_bob, v_bob, a.rows(), false, acc_b);
  const SparseIntMatrix c_b = acc_b.build();
  const double beta_bob = params.bypass(norm_bob, n) ? 1.0 : params.beta(norm_bob, n);
  const double thr_bob = params.verify_threshold(norm_bob, beta_bob);
  const std::vector<EntryPos> s_b = candidates_of(c_b, params.p, thr_bob);
  {
    WireWriter w;
    write_lists(w, Party::kBob, b, u_bob, v_bob, false);
    write_positions(w, s_b, a.rows(), b.cols());
    bob.send(std::move(w), "hhb.lists_candidates");
  }

  // Step 3, Alice: C_A, her extra candidates, the row bits for all of them.
  WireReader r3 = alice.receive();
  SplitAccumulator acc_a(a.rows(), b.cols());
  read_lists(r3, Party::kAlice, at, u_alice, v_alice, b.cols(), false, acc_a);
  const SparseIntMatrix c_a = acc_a.build();
  const std::vector<EntryPos> s_b_alice = read_positions(r3, a.rows(), b.cols());
  const std::set<EntryPos> from_bob(s_b_alice.begin(), s_b_alice.end());
  std::vector<EntryPos> s_a;
  for (const EntryPos& e :
       candidates_of(c_a, params.p, params.verify_threshold(norm_alice, beta))) {
    if (!from_bob.contains(e)) s_a.push_back(e);
  }
  const std::size_t samples = params.verify_samples(inner);
  const std::vector<Index> coords_alice = verify_coords(alice, samples, inner);
  {
    WireWriter w;
    write_positions(w, s_a, a.rows(), b.cols());
    auto send_row = [&](Index i) {
      if (coords_alice.empty()) {
        for (Index k = 0; k < inner; ++k) w.uint(a.at(i, k) != 0 ? 1 : 0, 1);
      } else {
        for (Index k : coords_alice) w.uint(a.at(i, k) != 0 ? 1 : 0, 1);
      }
    };
    for (const auto& e : s_b_alice) send_row(e.first);
    for (const auto& e : s_a) send_row(e.first);
    alice.send(std::move(w), "hhb.verify_rows");
  }

  // Bob: estimate each candidate from the sampled coordinates and decide.
  WireReader r4 = bob.receive();
  std::vector<EntryPos> cand = s_b;
  for (const EntryPos& e : read_positions(r4, a.rows(), b.cols())) cand.push_back(e);
  const std::vector<Index> coords_bob = verify_coords(bob, samples, inner);
  const double accept = (params.phi - params.eps / 2.0) * norm_bob;
  std::vector<double> estimates;
  estimates.reserve(cand.size());
  for (const auto& [i, j] : cand) {
    double dot = 0.0;
    double scale = 1.0;
    if (coords_bob.empty()) {
      for (Index k = 0; k < inner; ++k) dot += static_cast<double>(r4.uint(1) & (b.at(k, j) != 0));
    } else {
      for (Index k : coords_bob) dot += static_cast<double>(r4.uint(1) & (b.at(k, j) != 0));
      scale = static_cast<double>(inner) / static_cast<double>(coords_bob.size());
    }
    const double est = scale * dot;
    estimates.push_back(est);
    if (std::pow(est, params.p) >= accept) out.pairs.insert({i, j});
  }

  if (trace != nullptr) {
    trace->norm_pow = norm_bob;
    trace->beta = beta;
    trace->bypassed = bypassed;
    trace->kept_columns = kept;
    trace->split.c_a = c_a;
    trace->split.c_b = c_b;
    trace->split.owner.resize(static_cast<std::size_t>(inner));
    for (std::size_t k = 0; k < u_bob.size(); ++k) {
      trace->split.owner[k] = list_sender(u_bob[k], v_bob[k]);
    }
    trace->candidates = cand;
    trace->candidate_estimates = estimates;
    trace->sampled_coords = coords_bob;
  }
  return session.finish(Party::kBob, out);
}

}  // namespace mpstat
