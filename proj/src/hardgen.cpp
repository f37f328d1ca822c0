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

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "mpstat/random.hpp"

namespace mpstat {

// ---- metadata sidecar ----------------------------------------------------

void write_meta_jsonl(std::ostream& out, const InstanceMeta& meta) {
  nlohmann::ordered_json j;
  j["family"] = meta.family;
  j["seed"] = meta.seed;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.params) j["params"][k] = v;
  j["notes"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : meta.notes) j["notes"][k] = v;
  auto& p = j["planted"] = nlohmann::ordered_json::object();
  if (meta.planted_linf) p["linf"] = *meta.planted_linf;
  if (meta.planted_l1) p["l1"] = *meta.planted_l1;
  if (meta.planted_sum) p["sum"] = *meta.planted_sum;
  if (meta.intersecting) p["intersecting"] = *meta.intersecting;
  if (!meta.planted_pairs.empty()) {
    p["pairs"] = nlohmann::ordered_json::array();
    for (const auto& [r, c] : meta.planted_pairs) p["pairs"].push_back({r, c});
  }
  out << j.dump() << '\n';
}

InstanceMeta read_meta_jsonl(const std::string& line) {
  InstanceMeta m;
  try {
    const auto j = nlohmann::json::parse(line);
    m.family = j.at("family").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto params = j.value("params", nlohmann::json::object());
    for (const auto& [k, v] : params.items()) m.params[k] = v.get<double>();
    const auto notes = j.value("notes", nlohmann::json::object());
    for (const auto& [k, v] : notes.items()) m.notes[k] = v.get<std::string>();
    const auto p = j.value("planted", nlohmann::json::object());
    if (p.contains("linf")) m.planted_linf = p["linf"].get<double>();
    if (p.contains("l1")) m.planted_l1 = p["l1"].get<double>();
    if (p.contains("sum")) m.planted_sum = p["sum"].get<int>();
    if (p.contains("intersecting")) m.intersecting = p["intersecting"].get<bool>();
    if (p.contains("pairs")) {
      for (const auto& e : p["pairs"]) m.planted_pairs.emplace_back(e.at(0).get<Index>(), e.at(1).get<Index>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad instance metadata: ") + e.what());
  }
  return m;
}

void save_instance(const std::string& stem, const HardInstance& inst) {
  save_matrix(stem + ".A.txt", inst.a);
  save_matrix(stem + ".B.txt", inst.b);
  std::ofstream meta(stem + ".meta.jsonl", std::ios::app);
  if (!meta) throw InvalidInput("cannot open " + stem + ".meta.jsonl");
  write_meta_jsonl(meta, inst.meta);
}

namespace {

Index grid_side(std::size_t length) {
  const auto half = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(length))));
  if (length == 0 || half * half != length) {
    throw InvalidInput("input length must be a positive perfect square (n/2)^2");
  }
  return static_cast<Index>(half);
}

template <class T>
std::pair<SparseIntMatrix, SparseIntMatrix> embed(const std::vector<T>& x,
                                                  const std::vector<T>& y,
                                                  Value max_value) {
  if (x.size() != y.size()) throw InvalidInput("x and y differ in length");
  const Index half = grid_side(x.size());
  const Index n = 2 * half;
  std::vector<Triplet> ta, tb;
  for (Index r = 0; r < half; ++r) {
    for (Index c = 0; c < half; ++c) {
      const auto k = static_cast<std::size_t>(r * half + c);
      if (x[k] != 0) ta.push_back({r, c, static_cast<Value>(x[k])});
      if (y[k] != 0) tb.push_back({half + r, c, static_cast<Value>(y[k])});
    }
    ta.push_back({r, half + r, 1});
    tb.push_back({r, r, 1});
  }
  return {SparseIntMatrix::from_triplets(n, n, ta, max_value),
          SparseIntMatrix::from_triplets(n, n, tb, max_value)};
}

// k distinct values from [0, n), in random order.
std::vector<Index> distinct(Index n, Index k, Rng& rng) {
  if (k > n) throw InvalidInput("not enough distinct indices");
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  for (Index t = 0; t < k; ++t) {
    const auto s = t + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - t)));
    std::swap(all[static_cast<std::size_t>(t)], all[static_cast<std::size_t>(s)]);
  }
  all.resize(static_cast<std::size_t>(k));
  return all;
}

void check_density(double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw InvalidInput("density must lie in [0, 1]");
}

void check_n(Index n) {
  if (n < 1) throw InvalidInput("n must be positive");
}

double l1_through(const SparseIntMatrix& a, const SparseIntMatrix& b) {
  const auto cs = column_sums(a);
  const auto rs = row_sums(b);
  double total = 0.0;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    total += static_cast<double>(cs[k]) * static_cast<double>(rs[k]);
  }
  return total;
}

}  // namespace

// ---- set disjointness embedding ---------------------------------------------

DisjEmbedding gen_disj_embedding(const std::vector<std::uint8_t>& x,
                                 const std::vector<std::uint8_t>& y) {
  for (const auto* v : {&x, &y})
    for (std::uint8_t bit : *v)
      if (bit > 1) throw InvalidInput("disjointness inputs must be bits");
  DisjEmbedding e;
  e.x = x;
  e.y = y;
  std::tie(e.a, e.b) = embed(x, y, 1);
  for (std::size_t i = 0; i < x.size(); ++i) e.intersecting = e.intersecting || (x[i] && y[i]);
  return e;
}

HardInstance gen_gapinf_embedding(const std::vector<Value>& x,
                                  const std::vector<Value>& y, Value kappa) {
  if (kappa < 1) throw InvalidInput("kappa must be at least 1");
  Value best = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] < 0 || x[i] > kappa || y[i] < 0 || y[i] > kappa) {
      throw InvalidInput("entries must lie in [0, kappa]");
    }
    best = std::max(best, x[i] + y[i]);
  }
  HardInstance h;
  std::tie(h.a, h.b) = embed(x, y, kappa);
  h.meta.family = "gapinf-embed";
  h.meta.params["n"] = static_cast<double>(h.a.rows());
  h.meta.params["kappa"] = static_cast<double>(kappa);
  h.meta.planted_linf = static_cast<double>(best);
  return h;
}

// ---- SUM of DISJ instances ----------------------------------------------

double sum_default_beta(Index n) {
  const auto nn = static_cast<double>(std::max<Index>(n, 2));
  return std::min(std::sqrt(50.0 * std::log(nn) / nn), 1.0);
}

int sum_of_disj(const std::vector<std::vector<std::uint8_t>>& u,
                const std::vector<std::vector<std::uint8_t>>& v) {
  if (u.size() != v.size()) throw InvalidInput("u and v differ in length");
  int s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].size() != v[i].size()) throw InvalidInput("block lengths differ");
    bool hit = false;
    for (std::size_t t = 0; t < u[i].size(); ++t) hit = hit || (u[i][t] && v[i][t]);
    s += hit ? 1 : 0;
  }
  return s;
}

SumInstance gen_sum_instance(const SumParams& params, std::uint64_t seed) {
  check_n(params.n);
  if (!(params.kappa >= 1.0)) throw InvalidInput("kappa must be at least 1");
  if (params.k < 0 || params.k > params.n) throw InvalidInput("k must lie in [1, n]");
  if (!(params.beta >= 0.0 && params.beta <= 1.0)) throw InvalidInput("beta must lie in (0, 1]");
  SumInstance s;
  s.n = params.n;
  s.meta.family = "sum-instance";
  s.meta.seed = seed;
  if (params.beta > 0.0) {
    s.beta = params.beta;
  } else {
    s.beta = sum_default_beta(params.n);
    const auto nn = static_cast<double>(std::max<Index>(params.n, 2));
    if (50.0 * std::log(nn) / nn >= 1.0) s.meta.notes["beta"] = "sqrt(50 ln n / n) clamped to 1";
  }
  if (params.k > 0) {
    s.k = params.k;
  } else {
    const double exact = 1.0 / (4.0 * params.kappa * s.beta * s.beta);
    s.k = std::clamp<Index>(std::llround(exact), 1, params.n);
    s.meta.notes["k"] = "1/(4 kappa beta^2) = " + std::to_string(exact) + " rounded to " +
                        std::to_string(s.k);
  }
  s.blocks = (s.n + s.k - 1) / s.k;
  if (s.n % s.k != 0) s.meta.notes["blocks"] = "k does not divide n; padded to ceil(n/k) blocks";

  Rng rng(seed);
  const auto n = static_cast<std::size_t>(s.n);
  const auto k = static_cast<std::size_t>(s.k);
  s.u.assign(n, std::vector<std::uint8_t>(k, 0));
  s.v.assign(n, std::vector<std::uint8_t>(k, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      const bool w = rng.bernoulli(0.5);
      if (rng.bernoulli(s.beta)) (w ? s.u[i][t] : s.v[i][t]) = 1;
    }
  }
  s.special_d = static_cast<Index>(rng.below(n));
  s.special_m = static_cast<Index>(rng.below(k));
  const bool both = rng.bernoulli(0.5);
  const auto d = static_cast<std::size_t>(s.special_d);
  const auto m = static_cast<std::size_t>(s.special_m);
  s.u[d][m] = both ? 1 : 0;
  s.v[d][m] = both ? 1 : 0;
  s.planted_sum = both ? 1 : 0;
  if (sum_of_disj(s.u, s.v) != s.planted_sum) {
    throw std::logic_error("SUM instance disagrees with its planted value");
  }

  std::vector<Triplet> ta, tb;
  for (std::size_t i = 0; i < n; ++i) {
    for (Index z = 0; z < s.blocks; ++z) {
      for (std::size_t t = 0; t < k; ++t) {
        const Index col = z * s.k + static_cast<Index>(t);
        if (s.u[i][t]) ta.push_back({static_cast<Index>(i), col, 1});
        if (s.v[i][t]) tb.push_back({col, static_cast<Index>(i), 1});
      }
    }
  }
  const Index width = s.blocks * s.k;
  s.a = SparseIntMatrix::from_triplets(s.n, width, std::move(ta));
  s.b = SparseIntMatrix::from_triplets(width, s.n, std::move(tb));

  // ||AB||_inf = blocks * max_ij |U_i & V_j|, by packed words.
  const std::size_t words = (k + 63) / 64;
  auto pack = [&](const std::vector<std::vector<std::uint8_t>>& bits) {
    std::vector<std::uint64_t> out(n * words, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t t = 0; t < k; ++t)
        if (bits[i][t]) out[i * words + t / 64] |= 1ULL << (t % 64);
    return out;
  };
  const auto pu = pack(s.u);
  const auto pv = pack(s.v);
  int best = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      int c = 0;
      for (std::size_t w = 0; w < words; ++w) c += std::popcount(pu[i * words + w] & pv[j * words + w]);
      best = std::max(best, c);
    }

  auto& p = s.meta.params;
  p["n"] = static_cast<double>(s.n);
  p["k"] = static_cast<double>(s.k);
  p["kappa"] = params.kappa;
  p["beta"] = s.beta;
  p["blocks"] = static_cast<double>(s.blocks);
  p["D"] = static_cast<double>(s.special_d);
  p["M"] = static_cast<double>(s.special_m);
  p["linf_if_one_at_least"] = static_cast<double>(s.n) / static_cast<double>(s.k);
  p["linf_if_zero_at_most"] = 2.0 * s.beta * s.beta * static_cast<double>(s.n);
  s.meta.planted_sum = s.planted_sum;
  s.meta.planted_linf = static_cast<double>(s.blocks) * best;
  return s;
}

SumInstance gen_sum_instance(Index n, Index k, std::uint64_t seed) {
  SumParams p;
  p.n = n;
  p.k = k;
  return gen_sum_instance(p, seed);
}

// ---- planted and random families ----------------------------------------

HardInstance gen_random_density(Index n, double density, Value max_value,
                                std::uint64_t seed) {
  check_n(n);
  check_density(density);
  if (max_value < 1) throw InvalidInput("max_value must be at least 1");
  Rng rng(seed);
  std::vector<Triplet> ta, tb;
  for (auto* t : {&ta, &tb})
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (rng.bernoulli(density)) {
          t->push_back({i, j, 1 + static_cast<Value>(rng.below(static_cast<std::uint64_t>(max_value)))});
        }
  HardInstance h;
  h.a = SparseIntMatrix::from_triplets(n, n, std::move(ta));
  h.b = SparseIntMatrix::from_triplets(n, n, std::move(tb));
  h.meta.family = "random-density";
  h.meta.seed = seed;
  h.meta.params = {{"n", static_cast<double>(n)}, {"density", density},
                   {"max_value", static_cast<double>(max_value)}};
  h.meta.planted_l1 = l1_through(h.a, h.b);
  return h;
}

HardInstance gen_planted_max(Index n, double density, std::uint64_t seed) {
  check_n(n);
  check_density(density);
  Rng rng(seed);
  const auto r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  std::vector<Triplet> ta, tb;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (rng.bernoulli(density) || i == r) ta.push_back({i, j, 1});
      if (rng.bernoulli(density) || j == r) tb.push_back({i, j, 1});
    }
  HardInstance h;
  h.a = SparseIntMatrix::from_triplets(n, n, std::move(ta));
  h.b = SparseIntMatrix::from_triplets(n, n, std::move(tb));
  h.meta.family = "planted-max";
  h.meta.seed = seed;
  h.meta.params = {{"n", static_cast<double>(n)}, {"density", density}};
  h.meta.planted_linf = static_cast<double>(n);
  h.meta.planted_pairs = {{r, r}};
  h.meta.planted_l1 = l1_through(h.a, h.b);
  return h;
}

HardInstance gen_planted_max_integer(Index n, double density, Value noise_max,
                                     Value m, std::uint64_t seed) {
  check_n(n);
  check_density(density);
  if (noise_max < 1 || m < 1) throw InvalidInput("values must be at least 1");
  Rng rng(seed);
  const auto r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  const auto c = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  const auto q = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  std::vector<Triplet> ta, tb;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i != r && j != q && rng.bernoulli(density)) {
        ta.push_back({i, j, 1 + static_cast<Value>(rng.below(static_cast<std::uint64_t>(noise_max)))});
      }
      if (i != q && j != c && rng.bernoulli(density)) tb.push_back({i, j, 1});
    }
  HardInstance h;
  // Any other entry is at most (n - 1) noise_max.
  const Value bound = (n - 1) * noise_max;
  if (m <= bound) {
    h.meta.notes["m"] = "raised from " + std::to_string(m) + " above the noise bound";
    m = bound + 1;
  }
  ta.push_back({r, q, m});
  tb.push_back({q, c, 1});
  h.a = SparseIntMatrix::from_triplets(n, n, std::move(ta));
  h.b = SparseIntMatrix::from_triplets(n, n, std::move(tb));
  h.meta.family = "planted-max-int";
  h.meta.seed = seed;
  h.meta.params = {{"n", static_cast<double>(n)}, {"density", density},
                   {"noise_max", static_cast<double>(noise_max)}, {"m", static_cast<double>(m)}};
  h.meta.planted_linf = static_cast<double>(m);
  h.meta.planted_pairs = {{r, c}};
  h.meta.planted_l1 = l1_through(h.a, h.b);
  return h;
}

HardInstance gen_planted_hh_binary(Index n, Index overlap, double density,
                                   std::uint64_t seed) {
  check_n(n);
  check_density(density);
  if (overlap < 1 || overlap > n) throw InvalidInput("overlap must lie in [1, n]");
  Rng rng(seed);
  const auto r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  const auto c = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  std::vector<char> item(static_cast<std::size_t>(n), 0);
  for (Index k : distinct(n, overlap, rng)) item[static_cast<std::size_t>(k)] = 1;
  std::vector<Triplet> ta, tb;
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) {
      const bool shared = item[static_cast<std::size_t>(k)] != 0;
      if (i == r ? shared : (!shared && rng.bernoulli(density))) ta.push_back({i, k, 1});
    }
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j) {
      const bool shared = item[static_cast<std::size_t>(k)] != 0;
      if (shared ? j == c : (j != c && rng.bernoulli(density))) tb.push_back({k, j, 1});
    }
  HardInstance h;
  h.a = SparseIntMatrix::from_triplets(n, n, std::move(ta));
  h.b = SparseIntMatrix::from_triplets(n, n, std::move(tb));
  h.meta.family = "planted-hh";
  h.meta.seed = seed;
  h.meta.params = {{"n", static_cast<double>(n)}, {"overlap", static_cast<double>(overlap)},
                   {"density", density}};
  h.meta.planted_pairs = {{r, c}};
  h.meta.planted_l1 = l1_through(h.a, h.b);
  return h;
}

HardInstance gen_planted_hh_integer(Index n, const std::vector<double>& fraction,
                                    double density, std::uint64_t seed) {
  check_n(n);
  check_density(density);
  const auto h_count = static_cast<Index>(fraction.size());
  double sum = 0.0;
  for (double f : fraction) {
    if (!(f > 0.0)) throw InvalidInput("fractions must be positive");
    sum += f;
  }
  if (!(sum < 1.0)) throw InvalidInput("fractions must sum below 1");
  Rng rng(seed);
  const auto rows = distinct(n, h_count, rng);
  const auto cols = distinct(n, h_count, rng);
  const auto items = distinct(n, h_count, rng);
  std::vector<char> planted_row(static_cast<std::size_t>(n), 0), planted_col(planted_row), planted_item(planted_row);
  for (Index t = 0; t < h_count; ++t) {
    planted_row[static_cast<std::size_t>(rows[static_cast<std::size_t>(t)])] = 1;
    planted_col[static_cast<std::size_t>(cols[static_cast<std::size_t>(t)])] = 1;
    planted_item[static_cast<std::size_t>(items[static_cast<std::size_t>(t)])] = 1;
  }
  std::vector<Triplet> ta, tb;
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) {
      if (!planted_row[static_cast<std::size_t>(i)] && !planted_item[static_cast<std::size_t>(k)] &&
          rng.bernoulli(density)) {
        ta.push_back({i, k, 1});
      }
      if (!planted_item[static_cast<std::size_t>(i)] && !planted_col[static_cast<std::size_t>(k)] &&
          rng.bernoulli(density)) {
        tb.push_back({i, k, 1});
      }
    }
  HardInstance h;
  const double noise = l1_through(SparseIntMatrix::from_triplets(n, n, ta),
                                  SparseIntMatrix::from_triplets(n, n, tb));
  double total = noise / (1.0 - sum);
  if (noise == 0.0) {
    total = 1000.0;
    h.meta.notes["fractions"] = "no noise; values scaled from a total of 1000";
  }
  for (Index t = 0; t < h_count; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const Value v = std::max<Value>(1, std::llround(fraction[st] * total));
    ta.push_back({rows[st], items[st], v});
    tb.push_back({items[st], cols[st], 1});
    h.meta.planted_pairs.emplace_back(rows[st], cols[st]);
    h.meta.params["value_" + std::to_string(t)] = static_cast<double>(v);
  }
  h.a = SparseIntMatrix::from_triplets(n, n, std::move(ta));
  h.b = SparseIntMatrix::from_triplets(n, n, std::move(tb));
  h.meta.family = "planted-hh-int";
  h.meta.seed = seed;
  h.meta.params["n"] = static_cast<double>(n);
  h.meta.params["density"] = density;
  h.meta.planted_l1 = l1_through(h.a, h.b);
  return h;
}

}  // namespace mpstat
