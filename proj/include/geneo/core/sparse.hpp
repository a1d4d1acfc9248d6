#pragma once

/** @file sparse.hpp
    @brief Symmetric sparse matrix in upper-triangular CSR storage.

    Entries are accumulated as triplets (any triangle, duplicates summed) and
    compressed by finalize(). Only the upper triangle is stored; products expand
    it on the fly in a fixed order, so two products with identical inputs are
    bitwise identical.
*/

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"

#include <algorithm>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace geneo {

struct Triplet {
  Index row;
  Index col;
  double value;
};

class SparseSymMatrix {
public:
  SparseSymMatrix() = default;
  explicit SparseSymMatrix(Index dim) : dim_(dim), row_ptr_(dim + 1, 0) {}

  /// Accumulate a(row, col) += value (and its mirror). Invalidates finalization.
  void add(Index row, Index col, double value)
  {
    if (row < 0 || col < 0 || row >= dim_ || col >= dim_)
      throw SizeMismatch("SparseSymMatrix::add: (" + std::to_string(row) + "," + std::to_string(col) + ") outside dim " + std::to_string(dim_));
    if (row > col) std::swap(row, col);
    pending_.push_back({row, col, value});
    finalized_ = false;
  }

  void finalize()
  {
    // merge already-compressed entries with pending triplets
    std::vector<Triplet> all;
    all.reserve(values_.size() + pending_.size());
    for (Index r = 0; r < dim_ && !row_ptr_.empty(); ++r)
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) all.push_back({r, cols_[k], values_[k]});
    all.insert(all.end(), pending_.begin(), pending_.end());
    pending_.clear();
    std::stable_sort(all.begin(), all.end(), [](const Triplet& a, const Triplet& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });

    row_ptr_.assign(dim_ + 1, 0);
    cols_.clear();
    values_.clear();
    for (std::size_t k = 0; k < all.size();) {
      std::size_t m = k;
      double sum = 0.0;
      while (m < all.size() && all[m].row == all[k].row && all[m].col == all[k].col) sum += all[m++].value;
      cols_.push_back(all[k].col);
      values_.push_back(sum);
      ++row_ptr_[all[k].row + 1];
      k = m;
    }
    for (Index r = 0; r < dim_; ++r) row_ptr_[r + 1] += row_ptr_[r];
    finalized_ = true;
  }

  Index dim() const { return dim_; }
  bool finalized() const { return finalized_; }
  std::size_t nnz_upper() const { return values_.size(); }

  /// Upper-triangle entries (row <= col) in row-major order.
  std::vector<Triplet> upper_entries() const
  {
    require_finalized("upper_entries");
    std::vector<Triplet> out;
    out.reserve(values_.size());
    for (Index r = 0; r < dim_; ++r)
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, cols_[k], values_[k]});
    return out;
  }

  double coeff(Index row, Index col) const
  {
    require_finalized("coeff");
    if (row > col) std::swap(row, col);
    const auto first = cols_.begin() + row_ptr_[row];
    const auto last = cols_.begin() + row_ptr_[row + 1];
    const auto it = std::lower_bound(first, last, col);
    return (it != last && *it == col) ? values_[it - cols_.begin()] : 0.0;
  }

  /// y = A x for a block of columns.
  Matrix multiply(const Matrix& x) const
  {
    require_finalized("multiply");
    if (x.rows() != dim_) throw SizeMismatch("SparseSymMatrix::multiply: x has " + std::to_string(x.rows()) + " rows, expected " + std::to_string(dim_));
    Matrix y = Matrix::Zero(dim_, x.cols());
    for (Index r = 0; r < dim_; ++r) {
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const Index c = cols_[k];
        const double v = values_[k];
        y.row(r) += v * x.row(c);
        if (c != r) y.row(c) += v * x.row(r);
      }
    }
    return y;
  }

  Vector multiply(const Vector& x) const
  {
    require_finalized("multiply");
    if (x.size() != dim_) throw SizeMismatch("SparseSymMatrix::multiply: x has " + std::to_string(x.size()) + " entries, expected " + std::to_string(dim_));
    Vector y = Vector::Zero(dim_);
    for (Index r = 0; r < dim_; ++r) {
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const Index c = cols_[k];
        const double v = values_[k];
        y[r] += v * x[c];
        if (c != r) y[c] += v * x[r];
      }
    }
    return y;
  }

  Matrix to_dense() const
  {
    require_finalized("to_dense");
    Matrix d = Matrix::Zero(dim_, dim_);
    for (Index r = 0; r < dim_; ++r)
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        d(r, cols_[k]) = values_[k];
        d(cols_[k], r) = values_[k];
      }
    return d;
  }

  /// Dense principal submatrix A(idx, idx), i.e. R A R^T for the restriction R selecting idx.
  DenseSymMatrix principal_submatrix(std::span<const Index> idx) const
  {
    require_finalized("principal_submatrix");
    std::vector<Index> local(dim_, -1);
    for (std::size_t k = 0; k < idx.size(); ++k) local[idx[k]] = static_cast<Index>(k);
    Matrix d = Matrix::Zero(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const Index r = idx[a];
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        const Index b = local[cols_[k]];
        if (b < 0) continue;
        d(a, b) = values_[k];
        d(b, a) = values_[k];
      }
    }
    return DenseSymMatrix(d);
  }

  double frobenius_norm() const
  {
    require_finalized("frobenius_norm");
    double s = 0.0;
    for (Index r = 0; r < dim_; ++r)
      for (Index k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += (cols_[k] == r ? 1.0 : 2.0) * values_[k] * values_[k];
    return std::sqrt(s);
  }

private:
  void require_finalized(const char* what) const
  {
    if (!finalized_) throw Error(std::string("SparseSymMatrix::") + what + ": matrix not finalized");
  }

  Index dim_ = 0;
  bool finalized_ = true;
  std::vector<Triplet> pending_;
  std::vector<Index> row_ptr_ = std::vector<Index>(1, 0);
  std::vector<Index> cols_;
  std::vector<double> values_;
};

} // namespace geneo
