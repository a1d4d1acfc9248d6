#pragma once

/** @file projections.hpp
    @brief Near-kernel projections of one subdomain.

    For a local near-kernel basis G and an SPD local solver matrix B:
      xi0 = G (G^T B G)^{-1} G^T B          B-orthogonal projection onto span(G)
      q   = I - B G (G^T B^2 G)^{-1} G^T B  l2-orthogonal projection onto the
                                            B-orthogonal complement of span(G)
      B^dag = (I - xi0) B^{-1}              inverse of B on that complement
    All are kept in factored form.
*/

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"

#include <Eigen/QR>

#include <string>
#include <utility>

namespace geneo {

class Xi0Projection {
public:
  Xi0Projection() = default;
  Xi0Projection(Matrix G, const DenseSymMatrix& B) : G_(std::move(G))
  {
    if (G_.rows() != B.dim()) throw SizeMismatch("Xi0Projection: G has " + std::to_string(G_.rows()) + " rows, B is " + std::to_string(B.dim()));
    BG_ = B * G_;
    gram_ = Cholesky(Matrix(G_.transpose() * BG_), "G^T B G");
  }

  Index dim() const { return G_.rows(); }
  Index rank() const { return G_.cols(); }
  const Matrix& G() const { return G_; }
  const Matrix& BG() const { return BG_; }

  /// xi0 v
  Matrix apply(const Matrix& v) const
  {
    if (rank() == 0) return Matrix::Zero(v.rows(), v.cols());
    return G_ * gram_.solve(BG_.transpose() * v);
  }
  /// xi0^T v
  Matrix apply_transpose(const Matrix& v) const
  {
    if (rank() == 0) return Matrix::Zero(v.rows(), v.cols());
    return BG_ * gram_.solve(G_.transpose() * v);
  }
  /// (I - xi0) v
  Matrix complement(const Matrix& v) const { return v - apply(v); }
  /// (I - xi0^T) v
  Matrix complement_transpose(const Matrix& v) const { return v - apply_transpose(v); }

  Matrix dense() const { return apply(Matrix::Identity(dim(), dim())); }

private:
  Matrix G_;
  Matrix BG_;
  Cholesky gram_;
};

class L2ComplementProjection {
public:
  L2ComplementProjection() = default;
  L2ComplementProjection(const Matrix& G, const DenseSymMatrix& B)
  {
    if (G.rows() != B.dim()) throw SizeMismatch("L2ComplementProjection: G has " + std::to_string(G.rows()) + " rows, B is " + std::to_string(B.dim()));
    BG_ = B * G;
    gram_ = Cholesky(Matrix(BG_.transpose() * BG_), "G^T B^2 G");
  }

  Index dim() const { return BG_.rows(); }

  /// q v
  Matrix apply(const Matrix& v) const
  {
    if (BG_.cols() == 0) return v;
    return v - BG_ * gram_.solve(BG_.transpose() * v);
  }

  Matrix dense() const { return apply(Matrix::Identity(dim(), dim())); }

private:
  Matrix BG_;
  Cholesky gram_;
};

class BDagger {
public:
  BDagger() = default;
  BDagger(Xi0Projection xi0, Cholesky B_chol) : xi0_(std::move(xi0)), chol_(std::move(B_chol)) {}

  /// (I - xi0) B^{-1} v
  Matrix apply(const Matrix& v) const { return xi0_.complement(chol_.solve(v)); }

private:
  Xi0Projection xi0_;
  Cholesky chol_;
};

inline Xi0Projection build_xi0(const Matrix& G, const DenseSymMatrix& B) { return Xi0Projection(G, B); }
inline L2ComplementProjection build_q(const Matrix& G, const DenseSymMatrix& B) { return L2ComplementProjection(G, B); }
inline BDagger build_B_dag(const Matrix& G, const DenseSymMatrix& B) { return BDagger(Xi0Projection(G, B), Cholesky(B, "B")); }

/// l2-orthonormal basis of the B-orthogonal complement of span(G), i.e. of
/// ker(G^T B). Columns n-m.. of a full QR of B G (G of full column rank m).
inline Matrix complement_basis(const Matrix& G, const DenseSymMatrix& B)
{
  const Index n = B.dim();
  const Index m = G.cols();
  if (m == 0) return Matrix::Identity(n, n);
  if (m >= n) return Matrix::Zero(n, 0);
  Eigen::HouseholderQR<Matrix> qr(B * G);
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  return Q.rightCols(n - m);
}

} // namespace geneo
