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

#include "mpstat/sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "mpstat/random.hpp"

namespace mpstat {

namespace {

constexpr std::uint64_t kTagSign = 0x5349474EULL;
constexpr std::uint64_t kTagStable = 0x5354424CULL;
constexpr std::uint64_t kTagLevel = 0x4C45564CULL;
constexpr std::uint64_t kTagBucket = 0x424B4554ULL;
constexpr std::uint64_t kTagWeight = 0x57474854ULL;
constexpr std::uint64_t kTagFinger = 0x46494E47ULL;
constexpr std::uint64_t kTagBlock = 0x424C4B53ULL;

unsigned ceil_log2(std::uint64_t n) {
  return n <= 1 ? 0U : static_cast<unsigned>(std::bit_width(n - 1));
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

unsigned wide_bit_width(unsigned __int128 u) {
  const auto hi = static_cast<std::uint64_t>(u >> 64);
  if (hi != 0) return 64 + static_cast<unsigned>(std::bit_width(hi));
  return static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(u)));
}

Wide wide_abs(Wide v) { return v < 0 ? -v : v; }

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
  const std::uint64_t lo = static_cast<std::uint64_t>(prod) & L0Sampler::kPrime;
  const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 61);
  std::uint64_t r = lo + hi;
  if (r >= L0Sampler::kPrime) r -= L0Sampler::kPrime;
  return r;
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e != 0) {
    if (e & 1U) r = mulmod(r, base);
    base = mulmod(base, base);
    e >>= 1;
  }
  return r;
}

std::uint64_t to_field(Wide v) {
  constexpr auto P = static_cast<Wide>(L0Sampler::kPrime);
  Wide r = v % P;
  if (r < 0) r += P;
  return static_cast<std::uint64_t>(r);
}

// P(|X| <= t) for standard symmetric p-stable X, with X written as
// a(theta) * W^((p-1)/p), theta ~ U(0, pi/2), W ~ Exp(1).
double stable_abs_cdf(double p, double t) {
  constexpr int kNodes = 4000;
  const double h = (std::numbers::pi / 2) / kNodes;
  double acc = 0.0;
  for (int k = 0; k < kNodes; ++k) {
    const double theta = (k + 0.5) * h;
    const double a = std::sin(p * theta) / std::pow(std::cos(theta), 1.0 / p) *
                     std::pow(std::cos((1.0 - p) * theta), (1.0 - p) / p);
    double g;
    if (p < 1.0) {
      g = std::exp(-std::pow(a / t, p / (1.0 - p)));
    } else {
      g = -std::expm1(-std::pow(t / a, p / (p - 1.0)));
    }
    acc += g;
  }
  return acc * h / (std::numbers::pi / 2);
}

}  // namespace

void write_wide(WireWriter& w, Wide v) {
  const auto u = (static_cast<unsigned __int128>(v) << 1) ^
                 static_cast<unsigned __int128>(v >> 127);
  const unsigned width = wide_bit_width(u);
  w.uint(width, 8);
  const unsigned lo_bits = std::min(width, 64U);
  w.uint(static_cast<std::uint64_t>(u) &
             (lo_bits == 64 ? ~0ULL : ((1ULL << lo_bits) - 1)),
         lo_bits);
  if (width > 64) w.uint(static_cast<std::uint64_t>(u >> 64), width - 64);
}

Wide read_wide(WireReader& r) {
  const auto width = static_cast<unsigned>(r.uint(8));
  if (width > 128) throw ProtocolViolation("wide integer above 128 bits");
  unsigned __int128 u = r.uint(std::min(width, 64U));
  if (width > 64) u |= static_cast<unsigned __int128>(r.uint(width - 64)) << 64;
  const auto mag = static_cast<Wide>(u >> 1);
  return (u & 1U) ? -mag - 1 : mag;
}

double stable_variate(double p, double u1, double u2) {
  const double theta = std::numbers::pi * (u1 - 0.5);
  if (p == 1.0) return std::tan(theta);
  const double w = -std::log(u2);
  return std::sin(p * theta) / std::pow(std::cos(theta), 1.0 / p) *
         std::pow(std::cos((1.0 - p) * theta) / w, (1.0 - p) / p);
}

double stable_abs_median(double p) {
  if (!(p > 0.0 && p <= 2.0)) throw InvalidInput("stable index must be in (0,2]");
  if (p == 1.0) return 1.0;
  static std::mutex mu;
  static std::map<double, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(p); it != cache.end()) return it->second;
  double lo = std::log(1e-8);
  double hi = std::log(1e8);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (stable_abs_cdf(p, std::exp(mid)) < 0.5) lo = mid; else hi = mid;
  }
  const double m = std::exp(0.5 * (lo + hi));
  cache.emplace(p, m);
  return m;
}

// ---- LpSketchSpec ------------------------------------------------------------

std::size_t LpSketchSpec::width() const {
  const double inv = std::ceil(1.0 / (eps * eps) - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(c * inv - 1e-9)));
}

std::size_t LpSketchSpec::groups() const {
  return static_cast<std::size_t>(
      std::max(1.0, std::ceil(std::log(1.0 / delta) - 1e-9)));
}

std::size_t LpSketchSpec::levels() const {
  return ceil_log2(static_cast<std::uint64_t>(input_dim)) + 1;
}

std::size_t sketch_rows(const LpSketchSpec& spec) {
  if (spec.p == 0.0) return spec.groups() * spec.levels() * spec.width();
  return spec.width() * spec.groups();
}

// ---- LpSketchVector ---------------------------------------------------------

LpSketchVector& LpSketchVector::operator+=(const LpSketchVector& o) {
  if (coords.size() != o.coords.size()) throw InvalidInput("sketch size mismatch");
  for (std::size_t k = 0; k < coords.size(); ++k) coords[k] += o.coords[k];
  return *this;
}

void LpSketchVector::add_scaled(const LpSketchVector& o, Value scale) {
  if (coords.size() != o.coords.size()) throw InvalidInput("sketch size mismatch");
  if (scale == 0) return;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (o.coords[k] != 0) coords[k] += o.coords[k] * static_cast<Wide>(scale);
  }
}

// ---- LpSketch -----------------------------------------------------------------

LpSketch::LpSketch(LpSketchSpec spec, bool materialize) : spec_(spec) {
  if (!(spec.p >= 0.0 && spec.p <= 2.0)) throw InvalidInput("p must be in [0,2]");
  if (!(spec.eps > 0.0 && spec.eps < 1.0)) throw InvalidInput("eps must be in (0,1)");
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
    throw InvalidInput("delta must be in (0,1)");
  }
  if (spec.input_dim < 1) throw InvalidInput("input_dim must be positive");
  if (!(spec.c > 0.0)) throw InvalidInput("sketch constant must be positive");
  kind_ = spec.p == 0.0 ? Kind::kDistinct
          : spec.p == 2.0 ? Kind::kSigns
                          : Kind::kStable;
  rows_ = sketch_rows(spec);
  const auto n = static_cast<std::size_t>(spec.input_dim);
  if (kind_ == Kind::kStable) stable_median_ = stable_abs_median(spec.p);
  if (kind_ == Kind::kDistinct || !materialize) return;

  // Column-major: coordinate i's column is contiguous.
  matrix_.resize(rows_ * n);
  if (kind_ == Kind::kSigns) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t r = 0; r < rows_; r += 64) {
        const std::uint64_t bits = prf(spec.seed, kTagSign, i, r / 64);
        for (std::size_t k = r; k < std::min(rows_, r + 64); ++k) {
          matrix_[i * rows_ + k] = ((bits >> (k - r)) & 1U) ? 1 : -1;
        }
      }
    }
    return;
  }
  const double scale = std::ldexp(1.0, kFracBits);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < rows_; ++r) {
      const std::uint64_t w1 = prf(spec.seed, kTagStable, i, 2 * r);
      const std::uint64_t w2 = prf(spec.seed, kTagStable, i, 2 * r + 1);
      const double u1 = (static_cast<double>(w1 >> 11) + 0.5) * 0x1.0p-53;
      double s = stable_variate(spec.p, u1, to_unit_open0(w2));
      if (std::isnan(s)) s = 0.0;
      s = std::clamp(s, -kStableClamp, kStableClamp);
      matrix_[i * rows_ + r] = std::llround(s * scale);
    }
  }
}

LpSketchVector LpSketch::zero() const {
  LpSketchVector v;
  v.coords.assign(rows_, 0);
  return v;
}

void LpSketch::add_coordinate(LpSketchVector& sk, Index i, Value v) const {
  if (v == 0) return;
  if (i < 0 || i >= spec_.input_dim) throw InvalidInput("sketch index out of range");
  const auto ui = static_cast<std::uint64_t>(i);
  if (kind_ != Kind::kDistinct) {
    if (matrix_.empty()) throw InvalidInput("sketch matrix not materialized");
    const std::int64_t* col = matrix_.data() + ui * rows_;
    const auto wv = static_cast<Wide>(v);
    for (std::size_t r = 0; r < rows_; ++r) sk.coords[r] += col[r] * wv;
    return;
  }
  const std::size_t levels = spec_.levels();
  const std::size_t width = spec_.width();
  for (std::size_t rep = 0; rep < spec_.groups(); ++rep) {
    const std::uint64_t h = prf(spec_.seed, kTagLevel, rep, ui);
    const std::size_t top =
        std::min<std::size_t>(levels - 1, static_cast<std::size_t>(std::countr_zero(h | (1ULL << 63))));
    const std::uint64_t weight =
        1 + prf(spec_.seed, kTagWeight, rep, ui) % 0xFFFFULL;
    for (std::size_t l = 0; l <= top; ++l) {
      const std::size_t bucket =
          prf(spec_.seed, kTagBucket, rep * levels + l, ui) % width;
      sk.coords[(rep * levels + l) * width + bucket] +=
          static_cast<Wide>(weight) * v;
    }
  }
}

LpSketchVector LpSketch::apply(std::span<const Value> x) const {
  if (static_cast<Index>(x.size()) != spec_.input_dim) {
    throw InvalidInput("sketch input dimension mismatch");
  }
  LpSketchVector sk = zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    add_coordinate(sk, static_cast<Index>(i), x[i]);
  }
  return sk;
}

LpSketchVector LpSketch::apply_sparse(std::span<const Index> idx,
                                      std::span<const Value> vals) const {
  if (idx.size() != vals.size()) throw InvalidInput("index/value count mismatch");
  LpSketchVector sk = zero();
  for (std::size_t k = 0; k < idx.size(); ++k) add_coordinate(sk, idx[k], vals[k]);
  return sk;
}

double LpSketch::estimate_signs(const std::vector<double>& y) const {
  const std::size_t w = spec_.width();
  std::vector<double> means;
  for (std::size_t g = 0; g < spec_.groups(); ++g) {
    double acc = 0.0;
    for (std::size_t k = g * w; k < (g + 1) * w; ++k) acc += y[k] * y[k];
    means.push_back(acc / static_cast<double>(w));
  }
  return median_of(std::move(means));
}

double LpSketch::estimate_stable(const std::vector<double>& y) const {
  std::vector<double> mags(y.size());
  std::transform(y.begin(), y.end(), mags.begin(),
                 [](double v) { return std::abs(v); });
  const double med = median_of(std::move(mags));
  return std::pow(med / stable_median_, spec_.p);
}

double LpSketch::estimate_distinct(const LpSketchVector& sk) const {
  const std::size_t levels = spec_.levels();
  const std::size_t width = spec_.width();
  const double kw = static_cast<double>(width);
  // Occupancy N of K buckets after m balls: E[N] = K (1 - (1 - 1/K)^m).
  auto invert = [&](double occupied) {
    if (width == 1) return occupied;
    return std::log1p(-occupied / kw) / std::log1p(-1.0 / kw);
  };
  std::vector<double> per_rep;
  for (std::size_t rep = 0; rep < spec_.groups(); ++rep) {
    double chosen = -1.0;
    double last = 0.0;
    for (std::size_t l = 0; l < levels; ++l) {
      std::size_t occupied = 0;
      const Wide* base = sk.coords.data() + (rep * levels + l) * width;
      for (std::size_t b = 0; b < width; ++b) occupied += base[b] != 0 ? 1 : 0;
      const double scale = std::ldexp(1.0, static_cast<int>(l));
      const double m = occupied == width
                           ? invert(kw - 0.5)
                           : invert(static_cast<double>(occupied));
      last = m * scale;
      if (occupied < width && m <= 1.5 * kw) {
        chosen = last;
        break;
      }
    }
    per_rep.push_back(chosen >= 0.0 ? chosen : last);
  }
  return median_of(std::move(per_rep));
}

double LpSketch::estimate(const LpSketchVector& sk) const {
  if (sk.coords.size() != rows_) throw InvalidInput("sketch size mismatch");
  if (kind_ == Kind::kDistinct) return estimate_distinct(sk);
  const double unscale = kind_ == Kind::kStable ? std::ldexp(1.0, -kFracBits) : 1.0;
  std::vector<double> y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    y[r] = static_cast<double>(sk.coords[r]) * unscale;
  }
  return kind_ == Kind::kSigns ? estimate_signs(y) : estimate_stable(y);
}

void LpSketch::encode(WireWriter& w, const LpSketchVector& sk) const {
  if (sk.coords.size() != rows_) throw InvalidInput("sketch size mismatch");
  if (kind_ == Kind::kStable) {
    Wide max_abs = 0;
    for (Wide v : sk.coords) max_abs = std::max(max_abs, wide_abs(v));
    const unsigned bw = wide_bit_width(static_cast<unsigned __int128>(max_abs));
    const unsigned shift = bw > 31 ? bw - 31 : 0;
    QuantizedVector q;
    q.exponent = static_cast<std::int32_t>(shift) - kFracBits;
    q.mantissas.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      Wide v = sk.coords[r];
      if (shift > 0) {
        const Wide half = static_cast<Wide>(1) << (shift - 1);
        v = v >= 0 ? (v + half) >> shift : -((-v + half) >> shift);
      }
      v = std::clamp<Wide>(v, -2147483647, 2147483647);
      q.mantissas[r] = static_cast<std::int32_t>(v);
    }
    w.quantized(q);
    return;
  }
  std::vector<std::int64_t> dense(rows_);
  std::vector<Index> nz_idx;
  std::vector<std::uint64_t> nz_val;
  std::uint64_t max_z = 0;
  for (std::size_t r = 0; r < rows_; ++r) {
    const Wide v = sk.coords[r];
    if (v > INT64_MAX || v < INT64_MIN) {
      throw ProtocolViolation("integer sketch coordinate exceeds 64 bits");
    }
    dense[r] = static_cast<std::int64_t>(v);
    if (v != 0) {
      nz_idx.push_back(static_cast<Index>(r));
      nz_val.push_back(zigzag(dense[r]));
      max_z = std::max(max_z, nz_val.back());
    }
  }
  // Same length sints_minimal would produce.
  const std::size_t dense_bits = 7 + rows_ * bit_width_u64(max_z);
  WireWriter sparse_w;
  sparse_w.index_set(nz_idx);
  for (std::uint64_t v : nz_val) sparse_w.varint(v);
  const bool sparse = sparse_w.bit_length() < dense_bits;
  w.uint(sparse ? 1 : 0, 1);
  if (sparse) {
    w.append(sparse_w);
  } else {
    w.sints_minimal(dense);
  }
}

LpSketchVector LpSketch::decode(WireReader& r) const {
  LpSketchVector sk = zero();
  if (kind_ == Kind::kStable) {
    const QuantizedVector q = r.quantized(rows_);
    const int shift = q.exponent + kFracBits;
    if (shift < 0 || shift > 90) throw ProtocolViolation("bad sketch exponent");
    for (std::size_t k = 0; k < rows_; ++k) {
      sk.coords[k] = static_cast<Wide>(q.mantissas[k]) * (static_cast<Wide>(1) << shift);
    }
    return sk;
  }
  if (r.uint(1) == 1) {
    const std::vector<Index> idx = r.index_set();
    for (Index k : idx) {
      if (k < 0 || static_cast<std::size_t>(k) >= rows_) {
        throw ProtocolViolation("sketch coordinate out of range");
      }
      sk.coords[static_cast<std::size_t>(k)] = unzigzag(r.varint());
    }
  } else {
    const std::vector<std::int64_t> vals = r.sints_minimal(rows_);
    for (std::size_t k = 0; k < rows_; ++k) sk.coords[k] = vals[k];
  }
  return sk;
}

LpSketchVector LpSketch::quantize(const LpSketchVector& sk) const {
  WireWriter w;
  encode(w, sk);
  const std::size_t bits = w.bit_length();
  WireReader r(w.take_bytes(), bits);
  return decode(r);
}

// ---- L0SamplerState -------------------------------------------------------------

void L0SamplerState::add_scaled(const L0SamplerState& o, Value scale) {
  if (a.size() != o.a.size()) throw InvalidInput("sampler size mismatch");
  if (scale == 0) return;
  const std::uint64_t s_mod = to_field(scale);
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] += o.a[k] * static_cast<Wide>(scale);
    b[k] += o.b[k] * static_cast<Wide>(scale);
    std::uint64_t t = f[k] + mulmod(o.f[k], s_mod);
    if (t >= L0Sampler::kPrime) t -= L0Sampler::kPrime;
    f[k] = t;
  }
}

// ---- L0Sampler --------------------------------------------------------------------

L0Sampler::L0Sampler(Index input_dim, std::uint64_t seed, std::size_t reps)
    : dim_(input_dim), seed_(seed) {
  if (input_dim < 1) throw InvalidInput("input_dim must be positive");
  const unsigned lg = ceil_log2(static_cast<std::uint64_t>(input_dim));
  levels_ = lg + 1;
  reps_ = reps != 0 ? reps : std::max<std::size_t>(4, 2 * lg);
  z_.resize(reps_);
  for (std::size_t r = 0; r < reps_; ++r) {
    z_[r] = 1 + prf(seed_, kTagFinger, r) % (kPrime - 1);
  }
}

std::size_t L0Sampler::level_of(std::size_t rep, Index i) const {
  const std::uint64_t h = prf(seed_, kTagLevel, rep, static_cast<std::uint64_t>(i));
  return std::min<std::size_t>(levels_ - 1,
                               static_cast<std::size_t>(std::countr_zero(h | (1ULL << 63))));
}

L0SamplerState L0Sampler::zero() const {
  L0SamplerState s;
  s.a.assign(reps_ * levels_, 0);
  s.b.assign(reps_ * levels_, 0);
  s.f.assign(reps_ * levels_, 0);
  return s;
}

L0SamplerState L0Sampler::apply(std::span<const Value> x) const {
  if (static_cast<Index>(x.size()) != dim_) {
    throw InvalidInput("sampler input dimension mismatch");
  }
  std::vector<Index> idx;
  std::vector<Value> vals;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0) {
      idx.push_back(static_cast<Index>(i));
      vals.push_back(x[i]);
    }
  }
  return apply_sparse(idx, vals);
}

L0SamplerState L0Sampler::apply_sparse(std::span<const Index> idx,
                                       std::span<const Value> vals) const {
  if (idx.size() != vals.size()) throw InvalidInput("index/value count mismatch");
  L0SamplerState s = zero();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Index i = idx[k];
    const Value v = vals[k];
    if (i < 0 || i >= dim_) throw InvalidInput("sampler index out of range");
    if (v == 0) continue;
    const std::uint64_t v_mod = to_field(v);
    for (std::size_t rep = 0; rep < reps_; ++rep) {
      const std::size_t top = level_of(rep, i);
      const std::uint64_t fp =
          mulmod(v_mod, powmod(z_[rep], static_cast<std::uint64_t>(i) + 1));
      for (std::size_t l = 0; l <= top; ++l) {
        const std::size_t t = rep * levels_ + l;
        s.a[t] += v;
        s.b[t] += static_cast<Wide>(i) * v;
        std::uint64_t nf = s.f[t] + fp;
        if (nf >= kPrime) nf -= kPrime;
        s.f[t] = nf;
      }
    }
  }
  return s;
}

L0Outcome L0Sampler::sample(const L0SamplerState& s) const {
  if (s.a.size() != reps_ * levels_) throw InvalidInput("sampler size mismatch");
  bool all_zero = true;
  for (std::size_t rep = 0; rep < reps_; ++rep) {
    const std::size_t t = rep * levels_;
    if (s.a[t] != 0 || s.b[t] != 0 || s.f[t] != 0) all_zero = false;
  }
  if (all_zero) return L0Empty{};
  for (std::size_t rep = 0; rep < reps_; ++rep) {
    for (std::size_t l = 0; l < levels_; ++l) {
      const std::size_t t = rep * levels_ + l;
      const Wide a = s.a[t];
      if (a == 0 || s.b[t] % a != 0) continue;
      const Wide i = s.b[t] / a;
      if (i < 0 || i >= dim_) continue;
      const std::uint64_t expect =
          mulmod(to_field(a), powmod(z_[rep], static_cast<std::uint64_t>(i) + 1));
      if (expect == s.f[t]) return static_cast<Index>(i);
    }
  }
  return L0Fail{};
}

void L0Sampler::encode(WireWriter& w, const L0SamplerState& s) const {
  if (s.a.size() != reps_ * levels_) throw InvalidInput("sampler size mismatch");
  for (std::size_t t = 0; t < s.a.size(); ++t) {
    const bool nz = s.a[t] != 0 || s.b[t] != 0 || s.f[t] != 0;
    w.uint(nz ? 1 : 0, 1);
    if (!nz) continue;
    write_wide(w, s.a[t]);
    write_wide(w, s.b[t]);
    w.uint(s.f[t], 61);
  }
}

L0SamplerState L0Sampler::decode(WireReader& r) const {
  L0SamplerState s = zero();
  for (std::size_t t = 0; t < s.a.size(); ++t) {
    if (r.uint(1) == 0) continue;
    s.a[t] = read_wide(r);
    s.b[t] = read_wide(r);
    s.f[t] = r.uint(61);
    if (s.f[t] >= kPrime) throw ProtocolViolation("fingerprint out of field");
  }
  return s;
}

// ---- BlockedL2Sketch ----------------------------------------------------------------

BlockedL2Sketch::BlockedL2Sketch(Index input_dim, double kappa,
                                 std::uint64_t seed, std::size_t means,
                                 std::size_t medians)
    : dim_(input_dim), seed_(seed), means_(means), medians_(medians) {
  if (input_dim < 1) throw InvalidInput("input_dim must be positive");
  if (!(kappa >= 1.0)) throw InvalidInput("kappa must be at least 1");
  if (means == 0 || medians == 0) throw InvalidInput("empty block sketch");
  const auto sq = static_cast<Index>(std::llround(kappa * kappa));
  block_size_ = std::clamp<Index>(sq, 1, input_dim);
  block_count_ = (input_dim + block_size_ - 1) / block_size_;
}

int BlockedL2Sketch::sign(std::size_t row, Index i) const {
  return (prf(seed_, kTagBlock, row, static_cast<std::uint64_t>(i)) & 1U) ? 1 : -1;
}

std::vector<Value> BlockedL2Sketch::apply(std::span<const Value> x) const {
  if (static_cast<Index>(x.size()) != dim_) {
    throw InvalidInput("sketch input dimension mismatch");
  }
  std::vector<Value> out(rows(), 0);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const Index b = block_of_row(r);
    const Index end = std::min(dim_, (b + 1) * block_size_);
    Value acc = 0;
    for (Index i = b * block_size_; i < end; ++i) {
      if (x[static_cast<std::size_t>(i)] != 0) acc += sign(r, i) * x[static_cast<std::size_t>(i)];
    }
    out[r] = acc;
  }
  return out;
}

double BlockedL2Sketch::block_l2sq(std::span<const Value> coords) const {
  if (coords.size() != rows_per_block()) throw InvalidInput("block size mismatch");
  std::vector<double> means;
  for (std::size_t g = 0; g < medians_; ++g) {
    double acc = 0.0;
    for (std::size_t k = g * means_; k < (g + 1) * means_; ++k) {
      const auto v = static_cast<double>(coords[k]);
      acc += v * v;
    }
    means.push_back(acc / static_cast<double>(means_));
  }
  return median_of(std::move(means));
}

double BlockedL2Sketch::linf_estimate(std::span<const Value> sk) const {
  if (sk.size() != rows()) throw InvalidInput("sketch size mismatch");
  double best = 0.0;
  const std::size_t per = rows_per_block();
  for (Index b = 0; b < block_count_; ++b) {
    best = std::max(best, std::sqrt(block_l2sq(sk.subspan(static_cast<std::size_t>(b) * per, per))));
  }
  return best;
}

}  // namespace mpstat
