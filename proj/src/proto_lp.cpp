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

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "proto_util.hpp"

namespace mpstat {

using detail::median;
using detail::require_compatible;
using detail::row_times;

namespace {

constexpr unsigned kLevelCodeBits = 16;
constexpr std::int64_t kLevelCodeBias = 1 << 15;

std::uint64_t level_code(std::int64_t level) {
  if (level == kZeroRowLevel) return 0;
  const std::int64_t code = level + kLevelCodeBias;
  if (code < 1 || code >= (1 << kLevelCodeBits)) {
    throw InvalidInput("row level out of the 16-bit code range");
  }
  return static_cast<std::uint64_t>(code);
}

std::int64_t level_from_code(std::uint64_t code) {
  if (code == 0) return kZeroRowLevel;
  return static_cast<std::int64_t>(code) - kLevelCodeBias;
}

// Per-row sketch of B, the first-round payload.
std::vector<LpSketchVector> sketch_rows_of(const SparseIntMatrix& b,
                                           const LpSketch& sk) {
  std::vector<LpSketchVector> out;
  out.reserve(static_cast<std::size_t>(b.rows()));
  for (Index k = 0; k < b.rows(); ++k) {
    const auto r = b.row(k);
    out.push_back(sk.apply_sparse(r.cols, r.values));
  }
  return out;
}

// Alice's view: the sketch of row i of C from the sketches of the rows of B.
std::vector<double> row_estimates_from(const SparseIntMatrix& a,
                                       const std::vector<LpSketchVector>& bsk,
                                       const LpSketch& sk) {
  std::vector<double> est(static_cast<std::size_t>(a.rows()), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    if (r.empty()) continue;
    LpSketchVector acc = sk.zero();
    for (std::size_t t = 0; t < r.size(); ++t) {
      acc.add_scaled(bsk[static_cast<std::size_t>(r.cols[t])], r.values[t]);
    }
    est[static_cast<std::size_t>(i)] = std::max(0.0, sk.estimate(acc));
  }
  return est;
}

LpSketchSpec make_spec(const LpProtocolParams& params, double eps, Index dim,
                       std::uint64_t seed) {
  LpSketchSpec spec;
  spec.p = params.p;
  spec.eps = eps;
  spec.delta = params.delta;
  spec.input_dim = std::max<Index>(dim, 1);
  spec.seed = seed;
  spec.c = params.sketch_c;
  return spec;
}

}  // namespace

double LpProtocolParams::beta() const { return std::sqrt(eps); }

void LpProtocolParams::validate() const {
  if (!(p >= 0.0 && p <= 2.0)) throw InvalidInput("p must lie in [0, 2]");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  if (!(c_rho > 0.0)) throw InvalidInput("c_rho must be positive");
  if (!(sketch_c > 0.0)) throw InvalidInput("sketch_c must be positive");
  if (boost_reps < 1 || boost_reps % 2 == 0) {
    throw InvalidInput("boost_reps must be a positive odd integer");
  }
}

const RowGroup* RowGroupTable::find(std::int64_t level) const {
  auto it = std::lower_bound(
      groups.begin(), groups.end(), level,
      [](const RowGroup& g, std::int64_t l) { return g.level < l; });
  if (it == groups.end() || it->level != level) return nullptr;
  return &*it;
}

std::int64_t group_level(double estimate, double beta) {
  if (!(estimate > 0.0)) return kZeroRowLevel;
  const double base = 1.0 + beta;
  auto level = static_cast<std::int64_t>(std::floor(std::log(estimate) / std::log1p(beta)));
  // The log ratio can land one off near a boundary.
  while (std::pow(base, static_cast<double>(level)) > estimate) --level;
  while (std::pow(base, static_cast<double>(level + 1)) <= estimate) ++level;
  return level;
}

std::uint32_t encode_prob(double p) {
  if (!(p > 0.0)) throw InvalidInput("probability must be positive");
  if (p >= 1.0) return UINT32_MAX;
  const double scaled = std::ceil(p * 4294967296.0);
  if (scaled <= 1.0) return 0;
  return static_cast<std::uint32_t>(std::min(scaled, 4294967296.0) - 1.0);
}

double decode_prob(std::uint32_t q) {
  return (static_cast<double>(q) + 1.0) / 4294967296.0;
}

RowGroupTable build_row_groups(std::span<const double> row_estimates,
                               double beta, double rho) {
  RowGroupTable t;
  t.row_level.assign(row_estimates.size(), kZeroRowLevel);
  std::map<std::int64_t, RowGroup> by_level;
  double total = 0.0;
  for (std::size_t i = 0; i < row_estimates.size(); ++i) {
    const double e = row_estimates[i];
    const std::int64_t l = group_level(e, beta);
    if (l == kZeroRowLevel) continue;
    t.row_level[i] = l;
    RowGroup& g = by_level[l];
    g.level = l;
    g.rows.push_back(static_cast<Index>(i));
    g.norm_estimate += e;
    total += e;
  }
  for (auto& [level, g] : by_level) {
    const double raw = rho / static_cast<double>(g.rows.size()) *
                       (g.norm_estimate / total);
    g.prob = decode_prob(encode_prob(std::min(1.0, raw)));
    t.groups.push_back(std::move(g));
  }
  return t;
}

double row_product_lp(const SparseIntMatrix& a, Index i,
                      const SparseIntMatrix& b, double p) {
  std::vector<Index> cols;
  std::vector<Value> vals;
  row_times(a, i, b, cols, vals);
  if (p == 0.0) return static_cast<double>(vals.size());
  double s = 0.0;
  for (Value v : vals) s += std::pow(static_cast<double>(v), p);
  return s;
}

double sampled_estimate(const SparseIntMatrix& a, const SparseIntMatrix& b,
                        const RowGroupTable& table, double p, Rng& rng) {
  double z = 0.0;
  for (const RowGroup& g : table.groups) {
    for (Index i : g.rows) {
      if (rng.bernoulli(g.prob)) z += row_product_lp(a, i, b, p) / g.prob;
    }
  }
  return z;
}

double lp_estimate_rounds(const SparseIntMatrix& a, const SparseIntMatrix& b,
                          const LpProtocolParams& params,
                          ProtocolSession& session, LpRunTrace* trace) {
  params.validate();
  require_compatible(a, b);
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const auto reps = static_cast<std::size_t>(params.boost_reps);
  const double beta = params.beta();
  const Index n = b.rows();
  const Index m2 = b.cols();

  // Round 1, Bob: one sketch per row of B and repetition. S is Bob's own;
  // Alice only evaluates estimates, which do not depend on S.
  for (std::size_t r = 0; r < reps; ++r) {
    const LpSketch sk(make_spec(params, beta, m2, bob.rng().next()));
    WireWriter w;
    for (const auto& v : sketch_rows_of(b, sk)) sk.encode(w, v);
    bob.send(std::move(w), "lp.sketch_rows");
  }

  // Round 2, Alice: levels, probability table, sampled rows.
  const LpSketch alice_sk(make_spec(params, beta, m2, 0), false);
  std::vector<LpRunTrace> traces(reps);
  std::vector<WireWriter> outgoing(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    WireReader in = alice.receive();
    std::vector<LpSketchVector> bsk;
    bsk.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) bsk.push_back(alice_sk.decode(in));
    LpRunTrace& tr = traces[r];
    tr.row_estimates = row_estimates_from(a, bsk, alice_sk);
    tr.table = build_row_groups(tr.row_estimates, beta, params.rho());

    WireWriter& w = outgoing[r];
    for (std::int64_t l : tr.table.row_level) w.uint(level_code(l), kLevelCodeBits);
    w.varint(tr.table.groups.size());
    for (const RowGroup& g : tr.table.groups) {
      w.uint(level_code(g.level), kLevelCodeBits);
      w.uint(encode_prob(g.prob), 32);
    }
    Rng& arng = alice.rng();
    for (const RowGroup& g : tr.table.groups) {
      for (Index i : g.rows) {
        if (arng.bernoulli(g.prob)) tr.sampled_rows.push_back(i);
      }
    }
    std::sort(tr.sampled_rows.begin(), tr.sampled_rows.end());
    w.index_set(tr.sampled_rows);
    for (Index i : tr.sampled_rows) {
      const auto row = a.row(i);
      w.sparse_row(row.cols, row.values);
    }
  }
  for (auto& w : outgoing) alice.send(std::move(w), "lp.sampled_rows");

  // Bob: C' = A' B and the weighted sum.
  std::vector<double> estimates;
  for (std::size_t r = 0; r < reps; ++r) {
    WireReader in = bob.receive();
    std::vector<std::int64_t> level(static_cast<std::size_t>(a.rows()));
    for (auto& l : level) l = level_from_code(in.uint(kLevelCodeBits));
    const std::uint64_t groups = in.varint();
    std::map<std::int64_t, double> prob;
    for (std::uint64_t g = 0; g < groups; ++g) {
      const std::int64_t l = level_from_code(in.uint(kLevelCodeBits));
      prob[l] = decode_prob(static_cast<std::uint32_t>(in.uint(32)));
    }
    const std::vector<Index> rows = in.index_set();
    std::vector<Triplet> entries;
    std::vector<Index> cols;
    std::vector<Value> vals;
    for (Index i : rows) {
      in.sparse_row(cols, vals);
      for (std::size_t t = 0; t < cols.size(); ++t) entries.push_back({i, cols[t], vals[t]});
    }
    const SparseIntMatrix a_prime = SparseIntMatrix::from_triplets(
        a.rows(), a.cols(), std::move(entries), kUnboundedValue);
    double z = 0.0;
    for (Index i : rows) {
      const auto it = prob.find(level[static_cast<std::size_t>(i)]);
      if (it == prob.end()) throw ProtocolViolation("sampled row without a group");
      z += row_product_lp(a_prime, i, b, params.p) / it->second;
    }
    estimates.push_back(z);
  }
  if (trace != nullptr) {
    *trace = std::move(traces.back());
    trace->repetition_estimates = estimates;
  }
  return median(estimates);
}

EstimateReport run_lp_estimate(const SparseIntMatrix& a,
                               const SparseIntMatrix& b,
                               const LpProtocolParams& params,
                               ProtocolSession& session, LpRunTrace* trace) {
  const double z = lp_estimate_rounds(a, b, params, session, trace);
  return session.finish(Party::kBob, z);
}

EstimateReport run_lp_baseline(const SparseIntMatrix& a,
                               const SparseIntMatrix& b,
                               const LpProtocolParams& params,
                               ProtocolSession& session) {
  params.validate();
  require_compatible(a, b);
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  {
    const LpSketch sk(make_spec(params, params.eps, b.cols(), bob.rng().next()));
    WireWriter w;
    for (const auto& v : sketch_rows_of(b, sk)) sk.encode(w, v);
    bob.send(std::move(w), "baseline.sketch_rows");
  }
  const LpSketch sk(make_spec(params, params.eps, b.cols(), 0), false);
  WireReader in = alice.receive();
  std::vector<LpSketchVector> bsk;
  for (Index k = 0; k < b.rows(); ++k) bsk.push_back(sk.decode(in));
  double total = 0.0;
  for (double e : row_estimates_from(a, bsk, sk)) total += e;
  return session.finish(Party::kAlice, total);
}

EstimateReport run_l1_exact(const SparseIntMatrix& a, const SparseIntMatrix& b,
                            ProtocolSession& session) {
  require_compatible(a, b);
  {
    WireWriter w;
    w.uints_minimal(detail::as_unsigned(column_sums(a)));
    session.alice().send(std::move(w), "l1.column_sums");
  }
  WireReader in = session.bob().receive();
  const auto colsum = in.uints_minimal(static_cast<std::size_t>(b.rows()));
  const auto rowsum = row_sums(b);
  Wide total = 0;
  for (std::size_t j = 0; j < colsum.size(); ++j) {
    total += static_cast<Wide>(colsum[j]) * rowsum[j];
  }
  return session.finish(Party::kBob, static_cast<double>(total));
}

EstimateReport run_l1_sample(const SparseIntMatrix& a, const SparseIntMatrix& b,
                             ProtocolSession& session) {
  require_compatible(a, b);
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const unsigned iw = detail::index_width(a.rows());
  {
    const SparseIntMatrix at = a.transpose();
    const auto colsum = column_sums(a);
    WireWriter w;
    w.uints_minimal(detail::as_unsigned(colsum));
    for (Index j = 0; j < at.rows(); ++j) {
      const auto col = at.row(j);
      if (col.empty()) continue;
      // Uniform over the multiset: row i appears A_ij times.
      std::uint64_t u = alice.rng().below(static_cast<std::uint64_t>(colsum[static_cast<std::size_t>(j)]));
      std::size_t t = 0;
      while (u >= static_cast<std::uint64_t>(col.values[t])) {
        u -= static_cast<std::uint64_t>(col.values[t]);
        ++t;
      }
      w.uint(static_cast<std::uint64_t>(col.cols[t]), iw);
    }
    alice.send(std::move(w), "l1s.column_samples");
  }
  WireReader in = bob.receive();
  const auto colsum = in.uints_minimal(static_cast<std::size_t>(b.rows()));
  std::vector<Index> pick(colsum.size(), -1);
  for (std::size_t j = 0; j < colsum.size(); ++j) {
    if (colsum[j] > 0) pick[j] = static_cast<Index>(in.uint(iw));
  }
  const auto rowsum = row_sums(b);
  std::vector<Wide> weight(colsum.size());
  Wide total = 0;
  for (std::size_t j = 0; j < colsum.size(); ++j) {
    weight[j] = static_cast<Wide>(colsum[j]) * rowsum[j];
    total += weight[j];
  }
  if (total == 0) return session.finish(Party::kBob, EmptySignal{}, "AB is zero");
  Rng& brng = bob.rng();
  const auto j = detail::draw_weighted(weight, brng);
  const auto row = b.row(static_cast<Index>(j));
  std::uint64_t u = brng.below(static_cast<std::uint64_t>(rowsum[j]));
  std::size_t t = 0;
  while (u >= static_cast<std::uint64_t>(row.values[t])) {
    u -= static_cast<std::uint64_t>(row.values[t]);
    ++t;
  }
  return session.finish(Party::kBob,
                        EntrySample{pick[j], row.cols[t], static_cast<Index>(j)});
}

EstimateReport run_l0_sample_matrix(const SparseIntMatrix& a,
                                    const SparseIntMatrix& b,
                                    const L0SampleParams& params,
                                    ProtocolSession& session) {
  require_compatible(a, b);
  if (!(params.eps > 0.0 && params.eps < 1.0)) throw InvalidInput("eps must lie in (0, 1)");
  if (!(params.delta > 0.0 && params.delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  if (params.max_retries < 0) throw InvalidInput("max_retries must be nonnegative");
  Endpoint alice = session.alice();
  Endpoint bob = session.bob();
  const auto copies = static_cast<std::size_t>(params.max_retries) + 1;
  const Index m1 = std::max<Index>(a.rows(), 1);

  auto make = [&](Endpoint& ep) {
    LpSketchSpec spec;
    spec.p = 0.0;
    spec.eps = params.eps;
    spec.delta = params.delta;
    spec.input_dim = m1;
    spec.c = params.sketch_c;
    spec.seed = ep.shared(0).next();
    LpSketch sk(spec);
    std::vector<L0Sampler> samplers;
    for (std::size_t c = 0; c < copies; ++c) {
      samplers.emplace_back(m1, ep.shared(1 + c).next());
    }
    return std::make_pair(std::move(sk), std::move(samplers));
  };

  {
    const auto [sk, samplers] = make(alice);
    const SparseIntMatrix at = a.transpose();
    WireWriter w;
    for (Index k = 0; k < at.rows(); ++k) {
      const auto col = at.row(k);
      w.uint(col.empty() ? 0 : 1, 1);
      if (col.empty()) continue;
      sk.encode(w, sk.apply_sparse(col.cols, col.values));
      for (const L0Sampler& s : samplers) s.encode(w, s.apply_sparse(col.cols, col.values));
    }
    alice.send(std::move(w), "l0s.column_states");
  }

  const auto [sk, samplers] = make(bob);
  WireReader in = bob.receive();
  const Index n = b.rows();
  // Decoded column sketches kept sparse; most coordinates are zero.
  struct SparseSketch {
    std::vector<std::size_t> idx;
    std::vector<Wide> val;
  };
  std::vector<std::optional<SparseSketch>> colsk(static_cast<std::size_t>(n));
  std::vector<std::vector<L0SamplerState>> colst(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    if (in.uint(1) == 0) continue;
    const LpSketchVector v = sk.decode(in);
    SparseSketch& ss = colsk[static_cast<std::size_t>(k)].emplace();
    for (std::size_t r = 0; r < v.coords.size(); ++r) {
      if (v.coords[r] == 0) continue;
      ss.idx.push_back(r);
      ss.val.push_back(v.coords[r]);
    }
    for (const L0Sampler& s : samplers) colst[static_cast<std::size_t>(k)].push_back(s.decode(in));
  }
  // Column j of C is sum_k B_kj A_{*,k}.
  const SparseIntMatrix bt = b.transpose();
  std::vector<double> est(static_cast<std::size_t>(bt.rows()), 0.0);
  double total = 0.0;
  LpSketchVector acc = sk.zero();
  std::vector<std::size_t> touched;
  for (Index j = 0; j < bt.rows(); ++j) {
    const auto col = bt.row(j);
    touched.clear();
    for (std::size_t t = 0; t < col.size(); ++t) {
      const auto& s = colsk[static_cast<std::size_t>(col.cols[t])];
      if (!s) continue;
      for (std::size_t q = 0; q < s->idx.size(); ++q) {
        Wide& slot = acc.coords[s->idx[q]];
        if (slot == 0) touched.push_back(s->idx[q]);
        slot += s->val[q] * col.values[t];
      }
    }
    if (touched.empty()) continue;
    est[static_cast<std::size_t>(j)] = std::max(0.0, sk.estimate(acc));
    total += est[static_cast<std::size_t>(j)];
    for (std::size_t r : touched) acc.coords[r] = 0;
  }
  if (!(total > 0.0)) return session.finish(Party::kBob, EmptySignal{}, "AB is zero");
  Rng& brng = bob.rng();
  double u = brng.uniform() * total;
  Index j = 0;
  for (; j + 1 < bt.rows(); ++j) {
    const double e = est[static_cast<std::size_t>(j)];
    if (e > 0.0 && u < e) break;
    u -= e;
  }
  while (est[static_cast<std::size_t>(j)] <= 0.0) --j;  // rounding spill
  const auto col = bt.row(j);
  for (std::size_t c = 0; c < copies; ++c) {
    L0SamplerState acc = samplers[c].zero();
    for (std::size_t t = 0; t < col.size(); ++t) {
      const auto& st = colst[static_cast<std::size_t>(col.cols[t])];
      if (!st.empty()) acc.add_scaled(st[c], col.values[t]);
    }
    const L0Outcome out = samplers[c].sample(acc);
    if (const Index* i = std::get_if<Index>(&out)) {
      return session.finish(Party::kBob, EntrySample{*i, j, std::nullopt});
    }
  }
  return session.finish(Party::kBob, SampleFailure{},
                        "sampler failed on every copy");
}

}  // namespace mpstat
