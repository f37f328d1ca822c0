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

#include "mpstat/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mpstat {

SparseIntMatrix SparseIntMatrix::from_triplets(Index rows, Index cols,
                                               std::vector<Triplet> entries,
                                               Value max_value) {
  if (rows <= 0 || cols <= 0) {
    throw InvalidInput("matrix dimensions must be positive");
  }
  SparseIntMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.max_value_ = max_value;
  std::erase_if(entries, [](const Triplet& t) { return t.value == 0; });
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw InvalidInput("matrix entry index out of range");
    }
    if (t.value < 0) throw InvalidInput("negative matrix entry");
    if (t.value > max_value) throw InvalidInput("matrix entry above bound");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].row == entries[k - 1].row &&
        entries[k].col == entries[k - 1].col) {
      throw InvalidInput("duplicate matrix entry");
    }
  }
  m.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
  m.col_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());
  for (const Triplet& t : entries) {
    ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
    m.col_idx_.push_back(t.col);
    m.values_.push_back(t.value);
    if (t.value != 1) m.binary_ = false;
  }
  for (std::size_t i = 1; i < m.row_ptr_.size(); ++i) {
    m.row_ptr_[i] += m.row_ptr_[i - 1];
  }
  return m;
}

SparseIntMatrix SparseIntMatrix::zeros(Index rows, Index cols) {
  return from_triplets(rows, cols, {});
}

SparseIntMatrix SparseIntMatrix::identity(Index n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1});
  return from_triplets(n, n, std::move(t));
}

SparseIntMatrix SparseIntMatrix::ones(Index rows, Index cols) {
  std::vector<Triplet> t;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) t.push_back({i, j, 1});
  return from_triplets(rows, cols, std::move(t));
}

SparseIntMatrix SparseIntMatrix::from_dense(
    const Eigen::Matrix<Value, Eigen::Dynamic, Eigen::Dynamic>& dense,
    Value max_value) {
  std::vector<Triplet> t;
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j)
      if (dense(i, j) != 0) t.push_back({i, j, dense(i, j)});
  return from_triplets(dense.rows(), dense.cols(), std::move(t), max_value);
}

Value SparseIntMatrix::at(Index i, Index j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
    throw InvalidInput("matrix index out of range");
  }
  const RowView r = row(i);
  const auto it = std::lower_bound(r.cols.begin(), r.cols.end(), j);
  if (it == r.cols.end() || *it != j) return 0;
  return r.values[static_cast<std::size_t>(it - r.cols.begin())];
}

SparseIntMatrix::RowView SparseIntMatrix::row(Index i) const {
  if (i < 0 || i >= rows_) throw InvalidInput("row index out of range");
  const std::size_t b = row_ptr_[static_cast<std::size_t>(i)];
  const std::size_t e = row_ptr_[static_cast<std::size_t>(i) + 1];
  return {std::span<const Index>(col_idx_).subspan(b, e - b),
          std::span<const Value>(values_).subspan(b, e - b)};
}

std::vector<Triplet> SparseIntMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (Index i = 0; i < rows_; ++i) {
    const RowView r = row(i);
    for (std::size_t k = 0; k < r.size(); ++k)
      out.push_back({i, r.cols[k], r.values[k]});
  }
  return out;
}

SparseIntMatrix SparseIntMatrix::transpose() const {
  std::vector<Triplet> t = triplets();
  for (Triplet& e : t) std::swap(e.row, e.col);
  return from_triplets(cols_, rows_, std::move(t), max_value_);
}

SparseIntMatrix multiply(const SparseIntMatrix& a, const SparseIntMatrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidInput("multiply: inner dimensions differ");
  }
  std::vector<Triplet> out;
  std::vector<__int128> acc(static_cast<std::size_t>(b.cols()), 0);
  std::vector<Index> touched;
  std::vector<char> seen(static_cast<std::size_t>(b.cols()), 0);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto ar = a.row(i);
    for (std::size_t t = 0; t < ar.size(); ++t) {
      const auto br = b.row(ar.cols[t]);
      for (std::size_t s = 0; s < br.size(); ++s) {
        const auto j = static_cast<std::size_t>(br.cols[s]);
        acc[j] += static_cast<__int128>(ar.values[t]) * br.values[s];
        if (!seen[j]) {
          seen[j] = 1;
          touched.push_back(br.cols[s]);
        }
      }
    }
    for (Index j : touched) {
      const auto ju = static_cast<std::size_t>(j);
      if (acc[ju] > static_cast<__int128>(kUnboundedValue)) {
        throw InvalidInput("multiply: entry overflows int64");
      }
      out.push_back({i, j, static_cast<Value>(acc[ju])});
      acc[ju] = 0;
      seen[ju] = 0;
    }
    touched.clear();
  }
  return SparseIntMatrix::from_triplets(a.rows(), b.cols(), std::move(out),
                                        kUnboundedValue);
}

SparseIntMatrix add(const SparseIntMatrix& a, const SparseIntMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInput("add: shapes differ");
  }
  std::vector<Triplet> out;
  for (Index i = 0; i < a.rows(); ++i) {
    const auto ra = a.row(i);
    const auto rb = b.row(i);
    std::size_t x = 0, y = 0;
    while (x < ra.size() || y < rb.size()) {
      if (y == rb.size() || (x < ra.size() && ra.cols[x] < rb.cols[y])) {
        out.push_back({i, ra.cols[x], ra.values[x]});
        ++x;
      } else if (x == ra.size() || rb.cols[y] < ra.cols[x]) {
        out.push_back({i, rb.cols[y], rb.values[y]});
        ++y;
      } else {
        out.push_back({i, ra.cols[x], ra.values[x] + rb.values[y]});
        ++x;
        ++y;
      }
    }
  }
  return SparseIntMatrix::from_triplets(a.rows(), a.cols(), std::move(out),
                                        kUnboundedValue);
}

namespace {

double entry_pow(Value v, double p) {
  if (v == 0) return 0.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return static_cast<double>(v);
  if (p == 2.0) return static_cast<double>(v) * static_cast<double>(v);
  return std::pow(static_cast<double>(v), p);
}

}  // namespace

double lp_norm_pow(const SparseIntMatrix& c, double p) {
  if (!(p >= 0.0 && p <= 2.0)) throw InvalidInput("lp_norm_pow: p not in [0,2]");
  double sum = 0.0;
  for (Index i = 0; i < c.rows(); ++i) {
    for (Value v : c.row(i).values) sum += entry_pow(v, p);
  }
  return sum;
}

Value linf_norm(const SparseIntMatrix& c) {
  Value best = 0;
  for (Index i = 0; i < c.rows(); ++i)
    for (Value v : c.row(i).values) best = std::max(best, v);
  return best;
}

Value l1_norm(const SparseIntMatrix& c) {
  Value sum = 0;
  for (Index i = 0; i < c.rows(); ++i)
    for (Value v : c.row(i).values) sum += v;
  return sum;
}

MatrixStats matrix_stats(const SparseIntMatrix& c, double p) {
  MatrixStats s;
  s.p = p;
  s.entry_count = c.nnz();
  s.value = std::isinf(p) ? static_cast<double>(linf_norm(c))
                          : lp_norm_pow(c, p);
  return s;
}

std::set<EntryPos> heavy_hitters_exact(const SparseIntMatrix& c, double p,
                                       double phi) {
  if (!(phi > 0.0 && phi <= 1.0)) throw InvalidInput("phi not in (0,1]");
  if (!(p > 0.0 && p <= 2.0)) throw InvalidInput("p not in (0,2]");
  std::set<EntryPos> out;
  const double total = lp_norm_pow(c, p);
  if (total == 0.0) return out;
  const double threshold = phi * total;
  for (Index i = 0; i < c.rows(); ++i) {
    const auto r = c.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (entry_pow(r.values[k], p) >= threshold) out.insert({i, r.cols[k]});
    }
  }
  return out;
}

std::vector<Index> row_support(const SparseIntMatrix& a, Index i) {
  const auto r = a.row(i);
  return {r.cols.begin(), r.cols.end()};
}

std::vector<Index> col_support(const SparseIntMatrix& b, Index j) {
  if (j < 0 || j >= b.cols()) throw InvalidInput("column index out of range");
  std::vector<Index> out;
  for (Index i = 0; i < b.rows(); ++i) {
    if (b.at(i, j) != 0) out.push_back(i);
  }
  return out;
}

std::vector<Value> column_sums(const SparseIntMatrix& a) {
  std::vector<Value> s(static_cast<std::size_t>(a.cols()), 0);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t k = 0; k < r.size(); ++k)
      s[static_cast<std::size_t>(r.cols[k])] += r.values[k];
  }
  return s;
}

std::vector<Value> row_sums(const SparseIntMatrix& a) {
  std::vector<Value> s(static_cast<std::size_t>(a.rows()), 0);
  for (Index i = 0; i < a.rows(); ++i)
    for (Value v : a.row(i).values) s[static_cast<std::size_t>(i)] += v;
  return s;
}

std::vector<Index> column_counts(const SparseIntMatrix& a) {
  std::vector<Index> s(static_cast<std::size_t>(a.cols()), 0);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j : a.row(i).cols) ++s[static_cast<std::size_t>(j)];
  return s;
}

std::vector<Index> row_counts(const SparseIntMatrix& a) {
  std::vector<Index> s(static_cast<std::size_t>(a.rows()), 0);
  for (Index i = 0; i < a.rows(); ++i)
    s[static_cast<std::size_t>(i)] = static_cast<Index>(a.row(i).size());
  return s;
}

Eigen::Matrix<Value, Eigen::Dynamic, Eigen::Dynamic> to_dense(
    const SparseIntMatrix& a) {
  Eigen::Matrix<Value, Eigen::Dynamic, Eigen::Dynamic> d =
      Eigen::Matrix<Value, Eigen::Dynamic, Eigen::Dynamic>::Zero(a.rows(),
                                                                 a.cols());
  for (const Triplet& t : a.triplets()) d(t.row, t.col) = t.value;
  return d;
}

void write_matrix(std::ostream& out, const SparseIntMatrix& a) {
  out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << ' '
      << (a.is_binary() ? 1 : 0) << '\n';
  for (const Triplet& t : a.triplets()) {
    out << t.row << ' ' << t.col << ' ' << t.value << '\n';
  }
}

SparseIntMatrix read_matrix(std::istream& in, Value max_value) {
  Index rows = 0, cols = 0;
  std::size_t nnz = 0;
  int binary = 0;
  if (!(in >> rows >> cols >> nnz >> binary) || (binary != 0 && binary != 1)) {
    throw InvalidInput("matrix file: malformed header");
  }
  std::vector<Triplet> t;
  t.reserve(nnz);
  Index prev_row = -1, prev_col = -1;
  for (std::size_t k = 0; k < nnz; ++k) {
    Triplet e{};
    if (!(in >> e.row >> e.col >> e.value)) {
      throw InvalidInput("matrix file: truncated entry list");
    }
    if (e.value <= 0) throw InvalidInput("matrix file: nonpositive entry");
    if (binary == 1 && e.value != 1) {
      throw InvalidInput("matrix file: binary flag set but entry != 1");
    }
    if (e.row < prev_row || (e.row == prev_row && e.col <= prev_col)) {
      throw InvalidInput("matrix file: entries not sorted row-major");
    }
    prev_row = e.row;
    prev_col = e.col;
    t.push_back(e);
  }
  Index extra = 0;
  if (in >> extra) throw InvalidInput("matrix file: trailing data");
  return SparseIntMatrix::from_triplets(rows, cols, std::move(t), max_value);
}

void save_matrix(const std::string& path, const SparseIntMatrix& a) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open for writing: " + path);
  write_matrix(out, a);
}

SparseIntMatrix load_matrix(const std::string& path, Value max_value) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open for reading: " + path);
  return read_matrix(in, max_value);
}

}  // namespace mpstat
