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

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mpstat {

using Index = std::int64_t;
using Value = std::int64_t;

inline constexpr Value kDefaultMaxValue = 0xFFFFFFFFLL;  // 2^32 - 1
inline constexpr Value kUnboundedValue = std::numeric_limits<Value>::max();

// Raised for any malformed input: shape mismatch, out-of-range index,
// negative or oversized entry, bad parameter.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Triplet {
  Index row;
  Index col;
  Value value;
};

using EntryPos = std::pair<Index, Index>;

// Sparse nonnegative integer matrix in compressed-row form. Zeros are never
// stored. Immutable after construction.
class SparseIntMatrix {
 public:
  struct RowView {
    std::span<const Index> cols;
    std::span<const Value> values;
    std::size_t size() const { return cols.size(); }
    bool empty() const { return cols.empty(); }
  };

  SparseIntMatrix() = default;

  // Builds from triplets in any order. Zero values are dropped; duplicate
  // positions, negative values and values above max_value are rejected.
  static SparseIntMatrix from_triplets(Index rows, Index cols,
                                       std::vector<Triplet> entries,
                                       Value max_value = kDefaultMaxValue);
  static SparseIntMatrix zeros(Index rows, Index cols);
  static SparseIntMatrix identity(Index n);
  static SparseIntMatrix ones(Index rows, Index cols);
  static SparseIntMatrix from_dense(
      const Eigen::Matrix<Value, Eigen::Dynamic, Eigen::Dynamic>& dense,
      Value max_value = kDefaultMaxValue);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t nnz() const { return col_idx_.size(); }
  bool is_binary() const { return binary_; }
  Value max_value() const { return max_value_; }

  Value at(Index i, Index j) const;
  RowView row(Index i) const;

  std::vector<Triplet> triplets() const;
  SparseIntMatrix transpose() const;

  friend bool operator==(const SparseIntMatrix& a, const SparseIntMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
           a.row_ptr_ == b.row_ptr_ && a.col_idx_ == b.col_idx_ &&
           a.values_ == b.values_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  bool binary_ = true;
  Value max_value_ = kDefaultMaxValue;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<Value> values_;
};

struct MatrixStats {
  double p = 0.0;         // +infinity selects the max entry
  double value = 0.0;     // sum |C_ij|^p for finite p, max entry for p = inf
  std::size_t entry_count = 0;
};

struct HeavyHitterSet {
  std::set<EntryPos> pairs;
  double phi = 1.0;
  double eps = 0.0;
};

// C = A*B over the integers. Throws InvalidInput on shape mismatch and on
// int64 overflow of an output entry.
SparseIntMatrix multiply(const SparseIntMatrix& a, const SparseIntMatrix& b);

// Entrywise sum; shapes must agree.
SparseIntMatrix add(const SparseIntMatrix& a, const SparseIntMatrix& b);

// sum_ij |C_ij|^p with 0^0 = 0, so p = 0 counts nonzeros.
double lp_norm_pow(const SparseIntMatrix& c, double p);
Value linf_norm(const SparseIntMatrix& c);
Value l1_norm(const SparseIntMatrix& c);
MatrixStats matrix_stats(const SparseIntMatrix& c, double p);

// {(i,j) : C_ij^p >= phi * ||C||_p^p}.
std::set<EntryPos> heavy_hitters_exact(const SparseIntMatrix& c, double p,
                                       double phi);

std::vector<Index> row_support(const SparseIntMatrix& a, Index i);
std::vector<Index> col_support(const SparseIntMatrix& b, Index j);

// ||A_{*,j}||_1 for every column j, and ||A_{i,*}||_1 for every row i.
std::vector<Value> column_sums(const SparseIntMatrix& a);
std::vector<Value> row_sums(const SparseIntMatrix& a);
// Per-column / per-row nonzero counts.
std::vector<Index> column_counts(const SparseIntMatrix& a);
std::vector<Index> row_counts(const SparseIntMatrix& a);

Eigen::Matrix<Value, Eigen::Dynamic, Eigen::Dynamic> to_dense(
    const SparseIntMatrix& a);

// Text format: "n_rows n_cols nnz binary_flag" then "row col value" per
// line, row-major.
void write_matrix(std::ostream& out, const SparseIntMatrix& a);
SparseIntMatrix read_matrix(std::istream& in,
                            Value max_value = kDefaultMaxValue);
void save_matrix(const std::string& path, const SparseIntMatrix& a);
SparseIntMatrix load_matrix(const std::string& path,
                            Value max_value = kDefaultMaxValue);

}  // namespace mpstat
