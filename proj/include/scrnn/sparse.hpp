// Copyright 2026 The SCRNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "scrnn/error.hpp"

namespace scrnn {

template <typename T>
struct Triplet {
  std::size_t row;
  std::size_t col;
  T value;
};

/// Compressed-sparse-row matrix. Entries within a row are sorted by column
/// and explicit zeros are never stored, so two matrices with equal entries
/// have identical storage.
template <typename T>
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  /// Duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet<T>> triplets) {
    for (const auto& t : triplets) {
      SCRNN_REQUIRE(t.row < rows && t.col < cols, DimensionError,
                    "triplet index outside matrix shape");
    }
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    SparseMatrix m(rows, cols);
    std::size_t i = 0;
    while (i < triplets.size()) {
      std::size_t j = i;
      T sum{};
      while (j < triplets.size() && triplets[j].row == triplets[i].row &&
             triplets[j].col == triplets[i].col) {
        sum += triplets[j].value;
        ++j;
      }
      if (sum != T{}) {
        m.col_idx_.push_back(triplets[i].col);
        m.values_.push_back(sum);
        ++m.row_ptr_[triplets[i].row + 1];
      }
      i = j;
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    return m;
  }

  static SparseMatrix zero(std::size_t rows, std::size_t cols) {
    return SparseMatrix(rows, cols);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }
  bool is_zero() const { return values_.empty(); }

  std::span<const std::size_t> row_indices(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const T> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  T coeff(std::size_t r, std::size_t c) const {
    auto idx = row_indices(r);
    auto it = std::lower_bound(idx.begin(), idx.end(), c);
    if (it == idx.end() || *it != c) return T{};
    return row_values(r)[static_cast<std::size_t>(it - idx.begin())];
  }

  std::vector<Triplet<T>> triplets() const {
    std::vector<Triplet<T>> out;
    out.reserve(nonzeros());
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        out.push_back({r, col_idx_[p], values_[p]});
      }
    }
    return out;
  }

  SparseMatrix transpose() const {
    auto t = triplets();
    for (auto& e : t) std::swap(e.row, e.col);
    return from_triplets(cols_, rows_, std::move(t));
  }

  /// Exact product in T arithmetic (row-by-row scatter).
  SparseMatrix operator*(const SparseMatrix& rhs) const {
    SCRNN_REQUIRE(cols_ == rhs.rows_, DimensionError, "sparse product shape mismatch");
    SparseMatrix out(rows_, rhs.cols_);
    std::vector<T> acc(rhs.cols_, T{});
    std::vector<char> touched(rhs.cols_, 0);
    std::vector<std::size_t> pattern;
    for (std::size_t r = 0; r < rows_; ++r) {
      pattern.clear();
      for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        const std::size_t k = col_idx_[p];
        const T a = values_[p];
        for (std::size_t q = rhs.row_ptr_[k]; q < rhs.row_ptr_[k + 1]; ++q) {
          const std::size_t c = rhs.col_idx_[q];
          if (!touched[c]) {
            touched[c] = 1;
            pattern.push_back(c);
          }
          acc[c] += a * rhs.values_[q];
        }
      }
      std::sort(pattern.begin(), pattern.end());
      for (std::size_t c : pattern) {
        if (acc[c] != T{}) {
          out.col_idx_.push_back(c);
          out.values_.push_back(acc[c]);
        }
        acc[c] = T{};
        touched[c] = 0;
      }
      out.row_ptr_[r + 1] = out.values_.size();
    }
    return out;
  }

  SparseMatrix operator+(const SparseMatrix& rhs) const {
    SCRNN_REQUIRE(rows_ == rhs.rows_ && cols_ == rhs.cols_, DimensionError,
                  "sparse sum shape mismatch");
    auto t = triplets();
    auto u = rhs.triplets();
    t.insert(t.end(), u.begin(), u.end());
    return from_triplets(rows_, cols_, std::move(t));
  }

  bool operator==(const SparseMatrix& rhs) const = default;

  bool is_symmetric() const { return rows_ == cols_ && *this == transpose(); }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_),
                                              static_cast<Eigen::Index>(cols_));
    for (const auto& t : triplets()) {
      d(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) =
          static_cast<double>(t.value);
    }
    return d;
  }

  template <typename U>
  SparseMatrix<U> cast() const {
    SparseMatrix<U> out(rows_, cols_);
    out.row_ptr_ = row_ptr_;
    out.col_idx_ = col_idx_;
    out.values_.assign(values_.begin(), values_.end());
    return out;
  }

  /// out = this * x for a dense right-hand side (one or more columns).
  Eigen::SparseMatrix<double, Eigen::RowMajor> to_eigen() const {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (const auto& e : triplets()) {
      t.emplace_back(static_cast<int>(e.row), static_cast<int>(e.col), static_cast<double>(e.value));
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  void apply(const Eigen::MatrixXd& x, Eigen::MatrixXd& out) const {
    SCRNN_REQUIRE(static_cast<std::size_t>(x.rows()) == cols_, DimensionError,
                  "sparse apply shape mismatch");
    out.setZero(static_cast<Eigen::Index>(rows_), x.cols());
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
        out.row(static_cast<Eigen::Index>(r)) +=
            static_cast<double>(values_[p]) * x.row(static_cast<Eigen::Index>(col_idx_[p]));
      }
    }
  }

 private:
  template <typename U>
  friend class SparseMatrix;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<T> values_;
};

using IntSparse = SparseMatrix<std::int64_t>;
using RealSparse = SparseMatrix<double>;

}  // namespace scrnn
