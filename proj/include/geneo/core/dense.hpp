#pragma once

/** @file dense.hpp
    @brief Dense kernels for subdomain-sized and coarse-sized blocks.

    Subdomain and coarse problems are small enough to be handled densely:
    Cholesky solves, the symmetric-definite generalized eigenproblem, and a
    rank-revealing Gram-Schmidt in an arbitrary SPD inner product. Storage and
    factorizations are backed by Eigen.
*/

#include "geneo/core/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace geneo {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Square symmetric dense matrix. The upper triangle is authoritative and is
/// mirrored into the lower triangle on construction.
class DenseSymMatrix {
public:
  DenseSymMatrix() = default;
  explicit DenseSymMatrix(Index dim) : values_(Matrix::Zero(dim, dim)) {}
  explicit DenseSymMatrix(Matrix values) : values_(std::move(values))
  {
    if (values_.rows() != values_.cols())
      throw SizeMismatch("DenseSymMatrix: matrix is " + std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()));
    values_.triangularView<Eigen::StrictlyLower>() = values_.transpose().triangularView<Eigen::StrictlyLower>();
  }

  static DenseSymMatrix identity(Index dim) { return DenseSymMatrix(Matrix::Identity(dim, dim)); }

  Index dim() const { return values_.rows(); }
  const Matrix& values() const { return values_; }
  double operator()(Index r, Index c) const { return values_(r, c); }
  double frobenius_norm() const { return values_.norm(); }

  Matrix operator*(const Matrix& x) const { return values_ * x; }
  Vector operator*(const Vector& x) const { return values_ * x; }

private:
  Matrix values_;
};

/// Cholesky factorization M = L L^T. Throws NotPositiveDefinite on a pivot <= 0.
class Cholesky {
public:
  Cholesky() = default;
  explicit Cholesky(const DenseSymMatrix& m, const std::string& what = "matrix") { factor(m.values(), what); }
  explicit Cholesky(const Matrix& m, const std::string& what = "matrix") { factor(m, what); }

  Index dim() const { return dim_; }

  template <class Rhs>
  Matrix solve(const Eigen::MatrixBase<Rhs>& rhs) const
  {
    if (rhs.rows() != dim_) throw SizeMismatch("Cholesky::solve: rhs has " + std::to_string(rhs.rows()) + " rows, expected " + std::to_string(dim_));
    if (dim_ == 0) return Matrix::Zero(0, rhs.cols());
    return llt_.solve(rhs);
  }

  Vector solve(const Vector& rhs) const
  {
    if (rhs.size() != dim_) throw SizeMismatch("Cholesky::solve: rhs has " + std::to_string(rhs.size()) + " entries, expected " + std::to_string(dim_));
    if (dim_ == 0) return Vector::Zero(0);
    return llt_.solve(rhs);
  }

  Matrix lower() const
  {
    if (dim_ == 0) return Matrix::Zero(0, 0);
    return llt_.matrixL();
  }

private:
  void factor(const Matrix& m, const std::string& what)
  {
    if (m.rows() != m.cols()) throw SizeMismatch("Cholesky: " + what + " is not square");
    dim_ = m.rows();
    if (dim_ == 0) return;
    llt_.compute(m);
    // Eigen reports NumericalIssue for a non-positive pivot; NaN input slips
    // through, so check the diagonal of L as well.
    bool ok = llt_.info() == Eigen::Success;
    if (ok) {
      const Matrix& l = llt_.matrixLLT();
      for (Index k = 0; k < dim_; ++k)
        if (!(l(k, k) > 0.0)) ok = false;
    }
    if (!ok) throw NotPositiveDefinite("Cholesky: " + what + " is not positive definite (dim " + std::to_string(dim_) + ")");
  }

  Index dim_ = 0;
  Eigen::LLT<Matrix> llt_;
};

inline Vector cholesky_solve(const DenseSymMatrix& m, const Vector& rhs) { return Cholesky(m).solve(rhs); }

/// Eigenpairs of a symmetric-definite pencil, values ascending, vectors
/// T-orthonormal column-wise.
struct EigenPairs {
  Vector values;
  Matrix vectors;

  Index size() const { return values.size(); }
};

/** @brief Solve S v = lambda T v for symmetric S and SPD T.

    Reduction to standard form through the Cholesky factor of T, followed by a
    symmetric tridiagonal QR iteration. All eigenpairs are returned.
*/
inline EigenPairs sym_gevp(const DenseSymMatrix& s, const DenseSymMatrix& t)
{
  if (s.dim() != t.dim()) throw SizeMismatch("sym_gevp: S is " + std::to_string(s.dim()) + ", T is " + std::to_string(t.dim()));
  const Index n = s.dim();
  if (n == 0) return {Vector::Zero(0), Matrix::Zero(0, 0)};

  Cholesky chol(t, "sym_gevp right-hand operator");
  const Matrix l = chol.lower();
  // C = L^{-1} S L^{-T}
  Matrix c = l.triangularView<Eigen::Lower>().solve(s.values());
  c = l.triangularView<Eigen::Lower>().solve(c.transpose()).transpose();
  c = 0.5 * (c + c.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute(c, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NoConvergence("sym_gevp: QR iteration did not converge (dim " + std::to_string(n) + ")");

  EigenPairs out;
  out.values = es.eigenvalues();
  out.vectors = l.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  return out;
}

/// Eigenvalues of a symmetric matrix, ascending.
inline Vector sym_eigenvalues(const Matrix& m)
{
  if (m.rows() == 0) return Vector::Zero(0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NoConvergence("sym_eigenvalues: QR iteration did not converge");
  return es.eigenvalues();
}

/// Inner-product operator: returns ip * V for a block of columns V.
using InnerProduct = std::function<Matrix(const Matrix&)>;

inline InnerProduct euclidean_inner_product()
{
  return [](const Matrix& v) { return v; };
}

inline InnerProduct matrix_inner_product(const Matrix& m)
{
  return [m](const Matrix& v) -> Matrix { return m * v; };
}

struct RankRevealed {
  Matrix basis;              ///< ip-orthonormal columns
  std::vector<Index> kept;   ///< candidate column index behind each basis column
};

/** @brief Rank-revealing block Gram-Schmidt in the inner product @p ip.

    Columns are processed left to right. Each is orthogonalized twice against
    the kept basis; it is dropped when the ip-norm of its residual is at most
    tol times its own ip-norm (zero columns are always dropped). A positive
    semidefinite ip is accepted: columns of zero ip-norm are dropped.
*/
inline RankRevealed rank_reveal(const Matrix& v, const InnerProduct& ip, double tol = 1e-10)
{
  const Index n = v.rows();
  RankRevealed out;
  out.basis.resize(n, 0);
  if (v.cols() == 0) return out;

  Matrix q(n, v.cols());
  Matrix ipq(n, v.cols());
  Index kept = 0;
  Matrix ipv = ip(v);
  for (Index k = 0; k < v.cols(); ++k) {
    const double norm2 = v.col(k).dot(ipv.col(k));
    if (!(norm2 > 0.0)) continue;
    Vector w = v.col(k);
    for (int pass = 0; pass < 2 && kept > 0; ++pass) {
      const Vector coeff = ipq.leftCols(kept).transpose() * w;
      w.noalias() -= q.leftCols(kept) * coeff;
    }
    const Matrix ipw_exact = ip(w);
    const double r2 = w.dot(ipw_exact.col(0));
    if (!(r2 > 0.0) || std::sqrt(r2) <= tol * std::sqrt(norm2)) continue;
    const double r = std::sqrt(r2);
    q.col(kept) = w / r;
    ipq.col(kept) = ipw_exact.col(0) / r;
    out.kept.push_back(k);
    ++kept;
  }
  out.basis = q.leftCols(kept);
  return out;
}

inline Matrix rank_reveal_columns(const Matrix& v, const InnerProduct& ip, double tol = 1e-10) { return rank_reveal(v, ip, tol).basis; }

inline Matrix rank_reveal_columns(const Matrix& v, const Matrix& ip, double tol = 1e-10) { return rank_reveal(v, matrix_inner_product(ip), tol).basis; }

} // namespace geneo
