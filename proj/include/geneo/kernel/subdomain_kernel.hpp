#pragma once

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"
#include "geneo/dd/decomposition.hpp"
#include "geneo/kernel/projections.hpp"
#include "geneo/model/model_system.hpp"

#include <string>
#include <vector>

namespace geneo {

/// Local solver matrix B_i: Dirichlet R_i A R_i^T or Neumann A_i^Neu.
enum class LocalSolver { dirichlet, neumann };

inline std::string to_string(LocalSolver b) { return b == LocalSolver::dirichlet ? "dirichlet" : "neumann"; }

struct KernelOptions {
  LocalSolver solver = LocalSolver::dirichlet;
  bool use_near_kernel = true;  ///< false drops G_i entirely (G_i empty)
  double rank_tol = 1e-10;
};

struct SubdomainKernel {
  Index i = 0;
  LocalSolver solver = LocalSolver::dirichlet;
  Index raw_columns = 0;  ///< nonzero columns of R_i G before compression
  Matrix G;               ///< B-orthonormal basis of span(R_i G)
  DenseSymMatrix B;
  Cholesky B_chol;
  Xi0Projection xi0;
  L2ComplementProjection q;
  Matrix Q;         ///< complement_basis()
  Cholesky QBQ;     ///< of Q^T B Q

  Index dim() const { return B.dim(); }
  Index kernel_dim() const { return G.cols(); }

  Matrix B_inv(const Matrix& v) const { return B_chol.solve(v); }
  /// B^dag v = (I - xi0) B^{-1} v, evaluated as Q (Q^T B Q)^{-1} Q^T v,
  /// which stays symmetric when B is nearly singular on span(G).
  Matrix B_dag(const Matrix& v) const
  {
    if (Q.cols() == 0) return Matrix::Zero(v.rows(), v.cols());
    return Q * QBQ.solve(Matrix(Q.transpose() * v));
  }
  /// Composed form of B_dag, kept for cross-checks.
  Matrix B_dag_composed(const Matrix& v) const { return xi0.complement(B_chol.solve(v)); }
  /// l2-orthonormal basis of the B-orthogonal complement of span(G).
  Matrix complement_basis() const { return Q; }
};

/// Dense R_i G with all-zero columns removed.
inline Matrix restricted_near_kernel(const ModelSystem& ms, const Decomposition& d, Index i)
{
  const auto& s = d.dof_sets[i];
  std::vector<Index> local(ms.dim(), -1);
  for (std::size_t k = 0; k < s.size(); ++k) local[s[k]] = static_cast<Index>(k);
  std::vector<Index> col_map(ms.G.cols(), -1);
  std::vector<Eigen::Triplet<double>> entries;
  Index cols = 0;
  for (Index c = 0; c < ms.G.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(ms.G, c); it; ++it) {
      const Index r = local[it.row()];
      if (r < 0 || it.value() == 0.0) continue;
      if (col_map[c] < 0) col_map[c] = cols++;
      entries.emplace_back(r, col_map[c], it.value());
    }
  Matrix g = Matrix::Zero(static_cast<Index>(s.size()), cols);
  for (const auto& t : entries) g(t.row(), t.col()) += t.value();
  return g;
}

inline SubdomainKernel build_subdomain_kernel(const ModelSystem& ms, const Decomposition& d, Index i, const KernelOptions& opt = {})
{
  if (i < 0 || i >= d.N) throw SizeMismatch("build_subdomain_kernel: subdomain " + std::to_string(i) + " out of range");
  SubdomainKernel sk;
  sk.i = i;
  sk.solver = opt.solver;
  sk.B = opt.solver == LocalSolver::dirichlet ? d.dirichlet_matrix(ms.A, i) : d.neumann_dense(i);
  sk.B_chol = Cholesky(sk.B, "B_" + std::to_string(i));
  if (opt.use_near_kernel) {
    const Matrix raw = restricted_near_kernel(ms, d, i);
    sk.raw_columns = raw.cols();
    sk.G = rank_reveal_columns(raw, sk.B.values(), opt.rank_tol);
  } else {
    sk.G = Matrix::Zero(sk.B.dim(), 0);
  }
  sk.xi0 = Xi0Projection(sk.G, sk.B);
  sk.q = L2ComplementProjection(sk.G, sk.B);
  sk.Q = geneo::complement_basis(sk.G, sk.B);
  if (sk.Q.cols() > 0) sk.QBQ = Cholesky(Matrix(sk.Q.transpose() * sk.B.values() * sk.Q), "Q^T B Q");
  return sk;
}

inline std::vector<SubdomainKernel> build_kernels(const ModelSystem& ms, const Decomposition& d, const KernelOptions& opt = {})
{
  std::vector<SubdomainKernel> out;
  out.reserve(d.N);
  for (Index i = 0; i < d.N; ++i) out.push_back(build_subdomain_kernel(ms, d, i, opt));
  return out;
}

/** @brief Splitting of the B-orthogonal complement of G_i by the upper eigenproblem.

    V_gamma holds the eigenvectors with mu > gamma, W_gamma those with
    mu <= gamma; both are B-orthonormal and B-orthogonal to G_i. The
    projection eta = V V^T B maps onto V_gamma along W_gamma + span(G_i), so
    (I - eta)(I - xi0) is the B-orthogonal projection onto W_gamma.
*/
struct SorasSubspaces {
  Matrix V_gamma;
  Matrix W_gamma;
  Vector mu_gamma;  ///< eigenvalues behind V_gamma, descending
  Matrix BV;        ///< B V_gamma

  /// eta v
  Matrix eta(const Matrix& v) const
  {
    if (V_gamma.cols() == 0) return Matrix::Zero(v.rows(), v.cols());
    return V_gamma * (BV.transpose() * v);
  }
  /// (I - eta)(I - xi0) v
  Matrix project_W(const SubdomainKernel& sk, const Matrix& v) const
  {
    const Matrix w = sk.xi0.complement(v);
    return w - eta(w);
  }
  /// (I - eta)(I - xi0) B^{-1} v, evaluated as W W^T v with W = W_gamma
  /// B-orthonormal. The composed form loses the symmetry to cancellation when
  /// B is nearly singular on span(G).
  Matrix B_tilde_dag(const Matrix& v) const
  {
    if (W_gamma.cols() == 0) return Matrix::Zero(v.rows(), v.cols());
    return W_gamma * (W_gamma.transpose() * v);
  }
  /// Composed form of B_tilde_dag, kept for cross-checks.
  Matrix B_tilde_dag_composed(const SubdomainKernel& sk, const Matrix& v) const { return project_W(sk, sk.B_inv(v)); }
};

/// Strict threshold test with a relative tie band: values within 1e-10 of the
/// threshold count as ties and are excluded.
inline bool exceeds_threshold(double value, double threshold) { return value > threshold + 1e-10 * std::abs(threshold); }

/// @p upper: ascending eigenpairs of the upper eigenproblem, vectors lifted to
/// the local space and B-orthonormal.
inline SorasSubspaces build_soras_subspaces(const SubdomainKernel& sk, const EigenPairs& upper, double gamma)
{
  SorasSubspaces s;
  std::vector<Index> hi, lo;
  for (Index k = upper.size() - 1; k >= 0; --k)
    (exceeds_threshold(upper.values[k], gamma) ? hi : lo).push_back(k);
  s.V_gamma.resize(sk.dim(), static_cast<Index>(hi.size()));
  s.mu_gamma.resize(static_cast<Index>(hi.size()));
  for (std::size_t c = 0; c < hi.size(); ++c) {
    s.V_gamma.col(c) = upper.vectors.col(hi[c]);
    s.mu_gamma[c] = upper.values[hi[c]];
  }
  s.W_gamma.resize(sk.dim(), static_cast<Index>(lo.size()));
  for (std::size_t c = 0; c < lo.size(); ++c) s.W_gamma.col(c) = upper.vectors.col(lo[c]);
  s.BV = sk.B * s.V_gamma;
  return s;
}

/** @brief Projection p = Y (Y^T S Y)^{-1} Y^T S with S = (I - xi0^T) B (I - xi0).

    Y is [V_tau | V_gamma] compressed in the B inner product. A Gram matrix
    that is not SPD means span(Y) meets span(G_j).
*/
class PProjection {
public:
  PProjection() = default;
  PProjection(const Matrix& V_tau, const Matrix& V_gamma, const Xi0Projection& xi0, const DenseSymMatrix& B, double tol = 1e-10)
  {
    if (V_tau.rows() != B.dim() || V_gamma.rows() != B.dim()) throw SizeMismatch("PProjection: basis rows do not match B");
    Matrix cand(B.dim(), V_tau.cols() + V_gamma.cols());
    cand << V_tau, V_gamma;
    Y_ = rank_reveal_columns(cand, B.values(), tol);
    SY_ = xi0.complement_transpose(B * xi0.complement(Y_));
    if (Y_.cols() == 0) return;
    const Matrix gram = Y_.transpose() * SY_;
    // Y is B-orthonormal, so 1e-12 is a relative floor on the S-energy left after removing G_j
    const Vector ev = sym_eigenvalues(gram);
    if (!(ev[0] > 1e-12 * std::max(1.0, ev[ev.size() - 1]))) throw SingularGram("PProjection: Y^T S Y is singular (min eigenvalue " + std::to_string(ev[0]) + ")");
    try {
      gram_ = Cholesky(gram, "Y^T S Y");
    } catch (const NotPositiveDefinite& e) {
      throw SingularGram(e.what());
    }
  }

  const Matrix& Y() const { return Y_; }

  Matrix apply(const Matrix& v) const
  {
    if (Y_.cols() == 0) return Matrix::Zero(v.rows(), v.cols());
    return Y_ * gram_.solve(SY_.transpose() * v);
  }

private:
  Matrix Y_;
  Matrix SY_;
  Cholesky gram_;
};

inline PProjection build_p(const Matrix& V_tau, const Matrix& V_gamma, const Xi0Projection& xi0, const DenseSymMatrix& B)
{
  return PProjection(V_tau, V_gamma, xi0, B);
}

} // namespace geneo
