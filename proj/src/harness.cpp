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

#include "mpstat/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <exception>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mpstat/proto_hh.hpp"
#include "mpstat/proto_linf_binary.hpp"
#include "mpstat/proto_linf_general.hpp"
#include "mpstat/proto_lp.hpp"
#include "proto_util.hpp"

namespace mpstat {

const std::vector<ProtocolInfo>& protocol_catalog() {
  static const std::vector<ProtocolInfo> list = {
      {"lp", "l_p^p of AB, p in [0,2], via row sketches and norm-proportional row sampling",
       "2 rounds; within 1+eps w.p. 0.9 (boost with --boost)"},
      {"lp-baseline", "l_p^p of AB from one round of per-row sketches at accuracy eps",
       "1 round; within 1+eps, bits grow as 1/eps^2"},
      {"l1-exact", "||AB||_1 from Alice's column sums", "1 round; exact"},
      {"l1-sample", "an entry of AB drawn with probability C_ij / ||C||_1", "1 round; exact distribution"},
      {"l0-sample", "a nonzero of AB drawn near-uniformly", "1 round; each nonzero w.p. (1 +- eps)/||C||_0"},
      {"index-exchange", "additive split C_A + C_B = AB by shipping the shorter list per item",
       "3 messages; exact"},
      {"linf-2eps", "max entry of a binary product by nested entry sampling",
       "3 rounds; within [1/(2(1+eps)), 1+eps]"},
      {"linf-kappa", "max entry of a binary product with universe sampling",
       "within factor kappa; bits fall as kappa grows"},
      {"linf-general", "max entry of an integer product from blocked l_2 sketches of columns",
       "1 round; within factor 2 kappa, bits ~ n^2/kappa^2"},
      {"hh-general", "l_p (phi, eps) heavy hitters of an integer product by unit thinning",
       "4 rounds (p = 1) or 6; HH_phi in S in HH_{phi-eps} w.p. 0.9"},
      {"hh-binary", "l_p (phi, eps) heavy hitters of a binary product by column sampling and verification",
       "6 rounds; HH_phi in S in HH_{phi-eps} w.p. 0.9"},
  };
  return list;
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {
      "random-density", "planted-max", "planted-max-int", "planted-hh",
      "planted-hh-int", "disj-embed", "sum-instance", "file"};
  return names;
}

void ExperimentConfig::validate() const {
  const auto& cat = protocol_catalog();
  if (std::none_of(cat.begin(), cat.end(), [&](const ProtocolInfo& i) { return i.name == protocol; })) {
    throw InvalidInput("unknown protocol '" + protocol + "'");
  }
  const auto& fam = family_names();
  if (std::find(fam.begin(), fam.end(), family) == fam.end()) {
    throw InvalidInput("unknown family '" + family + "'");
  }
  if (n < 1) throw InvalidInput("n must be positive");
  if (trials < 0) throw InvalidInput("trials must be nonnegative");
  if (!(density >= 0.0 && density <= 1.0)) throw InvalidInput("density must lie in [0, 1]");
  if (value_max < 1) throw InvalidInput("value_max must be at least 1");
  if (overlap < 0 || overlap > n) throw InvalidInput("overlap must lie in [0, n]");
  if (!(p >= 0.0 && p <= 2.0)) throw InvalidInput("p must lie in [0, 2]");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidInput("eps must lie in (0, 1)");
  if (!(phi > 0.0 && phi <= 1.0)) throw InvalidInput("phi must lie in (0, 1]");
  if (!(kappa >= 1.0)) throw InvalidInput("kappa must be at least 1");
  if (boost < 1 || boost % 2 == 0) throw InvalidInput("boost must be a positive odd integer");
  if (!(c_rho > 0 && c_gamma > 0 && c_alpha > 0 && sketch_c > 0 && c_hh > 0)) {
    throw InvalidInput("constants must be positive");
  }
  if (threads < 1) throw InvalidInput("threads must be at least 1");
  if (oracle_cutoff < 0) throw InvalidInput("oracle cutoff must be nonnegative");
  if (family == "file" && (file_a.empty() || file_b.empty())) {
    throw InvalidInput("family 'file' needs both matrix files");
  }
  if (family == "disj-embed" && n % 2 != 0) throw InvalidInput("disj-embed needs even n");
}

HardInstance make_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.family == "random-density") return gen_random_density(cfg.n, cfg.density, cfg.value_max, seed);
  if (cfg.family == "planted-max") return gen_planted_max(cfg.n, cfg.density, seed);
  if (cfg.family == "planted-max-int") {
    return gen_planted_max_integer(cfg.n, cfg.density, cfg.value_max, 1, seed);
  }
  if (cfg.family == "planted-hh") {
    const Index overlap = cfg.overlap > 0 ? cfg.overlap : std::max<Index>(1, 3 * cfg.n / 4);
    return gen_planted_hh_binary(cfg.n, overlap, cfg.density, seed);
  }
  if (cfg.family == "planted-hh-int") return gen_planted_hh_integer(cfg.n, cfg.heavy, cfg.density, seed);
  if (cfg.family == "disj-embed") {
    const auto len = static_cast<std::size_t>((cfg.n / 2) * (cfg.n / 2));
    Rng rng(seed);
    std::vector<std::uint8_t> x(len), y(len);
    for (auto& b : x) b = rng.bernoulli(cfg.density) ? 1 : 0;
    for (auto& b : y) b = rng.bernoulli(cfg.density) ? 1 : 0;
    auto e = gen_disj_embedding(x, y);
    HardInstance h{std::move(e.a), std::move(e.b), {}};
    h.meta.family = "disj-embed";
    h.meta.seed = seed;
    h.meta.intersecting = e.intersecting;
    bool any = false;
    for (std::size_t i = 0; i < len; ++i) any = any || x[i] || y[i];
    h.meta.planted_linf = e.intersecting ? 2.0 : (any ? 1.0 : 0.0);
    return h;
  }
  if (cfg.family == "sum-instance") {
    SumParams sp;
    sp.n = cfg.n;
    sp.kappa = cfg.kappa;
    auto s = gen_sum_instance(sp, seed);
    return {std::move(s.a), std::move(s.b), std::move(s.meta)};
  }
  HardInstance h;
  h.a = load_matrix(cfg.file_a, kUnboundedValue);
  h.b = load_matrix(cfg.file_b, kUnboundedValue);
  h.meta.family = "file";
  return h;
}

namespace {

bool is_linf(const std::string& p) { return p.rfind("linf", 0) == 0; }

std::string pair_text(Index i, Index j) { return std::to_string(i) + ":" + std::to_string(j); }

std::string number_text(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

TrialRow run_trial(const ExperimentConfig& cfg, int trial) {
  const auto t = static_cast<std::uint64_t>(trial);
  const std::uint64_t instance_seed = prf(cfg.seed, 0x494E5354, t);
  TrialRow row;
  row.trial = trial;
  row.seed = prf(cfg.seed, 0x53455353, t);
  const HardInstance inst = make_instance(cfg, instance_seed);
  const SparseIntMatrix& a = inst.a;
  const SparseIntMatrix& b = inst.b;

  const auto start = std::chrono::steady_clock::now();
  ProtocolSession s(row.seed);
  EstimateReport rep;
  std::optional<SparseIntMatrix> split_sum;
  const std::string& proto = cfg.protocol;
  if (proto == "lp" || proto == "lp-baseline") {
    LpProtocolParams lp;
    lp.p = cfg.p;
    lp.eps = cfg.eps;
    lp.c_rho = cfg.c_rho;
    lp.sketch_c = cfg.sketch_c;
    lp.boost_reps = cfg.boost;
    rep = proto == "lp" ? run_lp_estimate(a, b, lp, s) : run_lp_baseline(a, b, lp, s);
  } else if (proto == "l1-exact") {
    rep = run_l1_exact(a, b, s);
  } else if (proto == "l1-sample") {
    rep = run_l1_sample(a, b, s);
  } else if (proto == "l0-sample") {
    L0SampleParams lp;
    lp.eps = cfg.eps;
    lp.sketch_c = cfg.sketch_c;
    rep = run_l0_sample_matrix(a, b, lp, s);
  } else if (proto == "index-exchange") {
    const auto split = index_exchange(a, b, s, !(a.is_binary() && b.is_binary()));
    split_sum = add(split.c_a, split.c_b);
    rep = s.finish(Party::kBob, static_cast<double>(l1_norm(*split_sum)));
  } else if (proto == "linf-2eps") {
    LinfParams lp;
    lp.eps = cfg.eps;
    lp.c_gamma = cfg.c_gamma;
    rep = run_linf_2eps(a, b, lp, s);
  } else if (proto == "linf-kappa") {
    UniverseSampleParams up;
    up.kappa = cfg.kappa;
    up.c_alpha = cfg.c_alpha;
    rep = run_linf_kappa(a, b, up, s);
  } else if (proto == "linf-general") {
    GeneralLinfParams gp;
    gp.kappa = cfg.kappa;
    rep = run_linf_general(a, b, gp, s);
  } else if (proto == "hh-general") {
    HHGeneralParams hp;
    hp.phi = cfg.phi;
    hp.eps = cfg.eps;
    hp.p = cfg.p;
    hp.c = cfg.c_hh;
    hp.norm_c_rho = cfg.c_rho;
    hp.norm_sketch_c = cfg.sketch_c;
    rep = run_hh_general(a, b, hp, s);
  } else {
    HHBinaryParams hp;
    hp.phi = cfg.phi;
    hp.eps = cfg.eps;
    hp.p = cfg.p;
    hp.c = cfg.c_hh;
    hp.norm_c_rho = cfg.c_rho;
    hp.norm_sketch_c = cfg.sketch_c;
    rep = run_hh_binary(a, b, hp, s);
  }
  const auto stop = std::chrono::steady_clock::now();
  row.bits_total = rep.bits_total;
  row.rounds = rep.rounds;
  if (cfg.timing) row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();

  const Index size = std::max({a.rows(), a.cols(), b.cols()});
  std::optional<SparseIntMatrix> c;
  if (cfg.oracle && size <= cfg.oracle_cutoff) c = multiply(a, b);

  if (is_linf(proto)) {
    row.planted = inst.meta.planted_linf;
  } else if (proto == "l1-exact" || (cfg.p == 1.0 && proto.rfind("lp", 0) == 0)) {
    row.planted = inst.meta.planted_l1;
  }

  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, double>) {
          row.result = number_text(r);
          row.estimate = r;
          if (c) {
            if (is_linf(proto)) row.oracle = static_cast<double>(linf_norm(*c));
            else if (proto == "l1-exact" || proto == "index-exchange") row.oracle = static_cast<double>(l1_norm(*c));
            else row.oracle = lp_norm_pow(*c, cfg.p);
          }
          const std::optional<double> truth = row.oracle ? row.oracle : row.planted;
          if (!truth) return;
          if (*truth > 0.0) row.ratio = r / *truth;
          const double x = *truth > 0.0 ? r / *truth : (r == 0.0 ? 1.0 : 0.0);
          if (proto == "l1-exact") {
            row.success = r == *truth;
          } else if (proto == "index-exchange") {
            row.success = c && *split_sum == *c;
          } else if (proto == "linf-2eps") {
            row.success = x >= 1.0 / (2.0 * (1.0 + cfg.eps)) && x <= 1.0 + cfg.eps;
          } else if (proto == "linf-kappa") {
            row.success = x >= 1.0 / cfg.kappa && x <= cfg.kappa;
          } else if (proto == "linf-general") {
            row.success = x >= 1.0 / (2.0 * cfg.kappa) && x <= 2.0 * cfg.kappa;
          } else {
            row.success = x >= 1.0 / (1.0 + cfg.eps) && x <= 1.0 + cfg.eps;
          }
        } else if constexpr (std::is_same_v<T, EntrySample>) {
          row.result = pair_text(r.row, r.col);
          if (c) {
            row.oracle = static_cast<double>(c->at(r.row, r.col));
            row.success = *row.oracle > 0.0;
          }
        } else if constexpr (std::is_same_v<T, HeavyHitterSet>) {
          std::string text;
          for (const auto& [i, j] : r.pairs) text += (text.empty() ? "" : ";") + pair_text(i, j);
          row.result = text.empty() ? "none" : text;
          row.estimate = static_cast<double>(r.pairs.size());
          if (c) {
            const auto lo = heavy_hitters_exact(*c, cfg.p, cfg.phi);
            const auto hi = heavy_hitters_exact(*c, cfg.p, cfg.phi - cfg.eps);
            row.oracle = static_cast<double>(lo.size());
            row.success = std::includes(r.pairs.begin(), r.pairs.end(), lo.begin(), lo.end()) &&
                          std::includes(hi.begin(), hi.end(), r.pairs.begin(), r.pairs.end());
          }
        } else if constexpr (std::is_same_v<T, EmptySignal>) {
          row.result = "empty";
          if (c) row.success = c->nnz() == 0;
        } else {
          row.result = "fail";
          if (c) row.success = false;
        }
      },
      rep.result);
  return row;
}

std::vector<TrialRow> run_experiment(const ExperimentConfig& cfg,
                                     std::vector<std::string>* warnings) {
  cfg.validate();
  if (cfg.oracle && cfg.n > cfg.oracle_cutoff && warnings != nullptr) {
    warnings->push_back("n = " + std::to_string(cfg.n) + " exceeds the oracle cutoff " +
                        std::to_string(cfg.oracle_cutoff) + "; oracle column left empty");
  }
  std::vector<TrialRow> rows(static_cast<std::size_t>(cfg.trials));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      try {
        rows[static_cast<std::size_t>(t)] = run_trial(cfg, t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = cfg.trials;
      }
    }
  };
  const int workers = std::min(cfg.threads, std::max(cfg.trials, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return rows;
}

// ---- CSV -------------------------------------------------------------------

namespace {

const std::vector<std::string> kColumns = {
    "protocol", "family", "n",      "p",    "eps",     "phi",     "kappa", "trial",      "seed",
    "result",   "estimate", "oracle", "planted", "ratio", "success", "bits_total", "rounds", "wall_ms"};

std::string opt_text(const std::optional<double>& v) { return v ? number_text(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw InvalidInput("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_csv(std::ostream& out, const ExperimentConfig& cfg,
               const std::vector<TrialRow>& rows) {
  out << kCsvVersionLine << '\n';
  for (std::size_t k = 0; k < kColumns.size(); ++k) out << (k ? "," : "") << kColumns[k];
  out << '\n';
  for (const TrialRow& r : rows) {
    out << cfg.protocol << ',' << cfg.family << ',' << cfg.n << ',' << number_text(cfg.p) << ','
        << number_text(cfg.eps) << ',' << number_text(cfg.phi) << ',' << number_text(cfg.kappa) << ','
        << r.trial << ',' << r.seed << ',' << r.result << ',' << opt_text(r.estimate) << ','
        << opt_text(r.oracle) << ',' << opt_text(r.planted) << ',' << opt_text(r.ratio) << ','
        << (r.success ? (*r.success ? "1" : "0") : "") << ',' << r.bits_total << ',' << r.rounds
        << ',' << opt_text(r.wall_ms) << '\n';
  }
}

std::vector<SummaryRow> summarize(std::istream& csv) {
  std::vector<SummaryRow> out;
  std::string line;
  if (!std::getline(csv, line)) return out;
  if (line != kCsvVersionLine) throw InvalidInput("missing '" + std::string(kCsvVersionLine) + "' line");
  std::size_t line_no = 1;
  bool header = false;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<double>> bits, rounds;
  std::vector<std::size_t> wins;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line);
    // Concatenated runs repeat the header.
    if (f == kColumns) {
      header = true;
      continue;
    }
    if (!header) throw InvalidInput("line " + std::to_string(line_no) + ": unexpected header");
    if (f.size() != kColumns.size()) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(kColumns.size()) + " fields");
    }
    const std::string key = f[0] + ',' + f[1] + ',' + f[2] + ',' + f[3] + ',' + f[4] + ',' + f[5] + ',' + f[6];
    auto it = index.find(key);
    if (it == index.end()) {
      SummaryRow s;
      s.protocol = f[0];
      s.family = f[1];
      s.n = static_cast<Index>(parse_number(f[2], line_no));
      s.p = parse_number(f[3], line_no);
      s.eps = parse_number(f[4], line_no);
      s.phi = parse_number(f[5], line_no);
      s.kappa = parse_number(f[6], line_no);
      it = index.emplace(key, out.size()).first;
      out.push_back(s);
      bits.emplace_back();
      rounds.emplace_back();
      wins.push_back(0);
    }
    const std::size_t g = it->second;
    SummaryRow& s = out[g];
    ++s.trials;
    if (!f[14].empty()) {
      if (f[14] != "0" && f[14] != "1") {
        throw InvalidInput("line " + std::to_string(line_no) + ": success must be 0, 1 or empty");
      }
      ++s.scored;
      wins[g] += f[14] == "1";
    }
    bits[g].push_back(parse_number(f[15], line_no));
    rounds[g].push_back(parse_number(f[16], line_no));
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    if (out[g].scored > 0) {
      out[g].success_rate = static_cast<double>(wins[g]) / static_cast<double>(out[g].scored);
    }
    out[g].median_bits = detail::median(bits[g]);
    out[g].median_rounds = detail::median(rounds[g]);
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "protocol,family,n,p,eps,phi,kappa,trials,scored,success_rate,median_bits,median_rounds\n";
  for (const SummaryRow& s : rows) {
    out << s.protocol << ',' << s.family << ',' << s.n << ',' << number_text(s.p) << ','
        << number_text(s.eps) << ',' << number_text(s.phi) << ',' << number_text(s.kappa) << ','
        << s.trials << ',' << s.scored << ',' << opt_text(s.success_rate) << ','
        << number_text(s.median_bits) << ',' << number_text(s.median_rounds) << '\n';
  }
}

}  // namespace mpstat
