#pragma once

/** @file gevp.hpp
    @brief The three local generalized eigenproblems behind the spectral coarse spaces.

    lower_as:    (I - xi0^T) D (R A R^T) D (I - xi0) v = lambda A^Neu v
    lower_soras: (I - xi0^T) B (I - xi0) v            = lambda A^Neu v
    upper_soras: D (R A R^T) D u = mu B u   for u in the B-orthogonal complement of G
    The upper problem is posed in an l2-orthonormal basis Q of that complement;
    its vectors are lifted back as Q u and are B-orthonormal. The lower
    problems return G_j exactly with eigenvalue 0.
*/

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"
#include "geneo/dd/decomposition.hpp"
#include "geneo/kernel/subdomain_kernel.hpp"
#include "geneo/model/model_system.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace geneo {

enum class GevpKind { lower_as, lower_soras, upper_soras };

inline std::string to_string(GevpKind k)
{
  switch (k) {
  case GevpKind::lower_as: return "lower_as";
  case GevpKind::lower_soras: return "lower_soras";
  case GevpKind::upper_soras: return "upper_soras";
  }
  return "unknown";
}

struct GevpSpec {
  GevpKind kind = GevpKind::lower_as;
  Index j = 0;
  double threshold = 0.5;
};

/// Left and right operators of a pencil, in the space where it is solved.
struct Pencil {
  DenseSymMatrix left;
  DenseSymMatrix right;
  Matrix lift;  ///< maps pencil coordinates to local dofs (identity for the lower kinds)
};

inline Pencil assemble_pencil(GevpKind kind, const ModelSystem& ms, const Decomposition& d, const SubdomainKernel& sk)
{
  const Index j = sk.i;
  const Index n = sk.dim();
  const Matrix Dm = d.D[j].asDiagonal();
  Pencil p;
  switch (kind) {
  case GevpKind::lower_as:
  case GevpKind::lower_soras: {
    // I - xi0 = B^dag B with the factored B^dag; forming G (G^T B G)^{-1} G^T B
    // explicitly loses digits because B is nearly singular on span(G)
    const Matrix BdB = sk.B_dag(sk.B.values());
    Matrix left = kind == GevpKind::lower_as ? Matrix(BdB.transpose() * Dm * d.dirichlet_matrix(ms.A, j).values() * Dm * BdB) : Matrix(sk.B.values() * BdB);
    p.left = DenseSymMatrix(Matrix(0.5 * (left + left.transpose())));
    p.right = d.neumann_dense(j);
    p.lift = Matrix::Identity(n, n);
    break;
  }
  case GevpKind::upper_soras: {
    const Matrix Q = sk.complement_basis();
    const Matrix DAD = Dm * d.dirichlet_matrix(ms.A, j).values() * Dm;
    p.left = DenseSymMatrix(Matrix(Q.transpose() * DAD * Q));
    p.right = DenseSymMatrix(Matrix(Q.transpose() * sk.B.values() * Q));
    p.lift = Q;
    break;
  }
  }
  return p;
}

namespace detail {

/** Lower pencil with span(G) deflated exactly. G lies in the kernel of the
    left side, so every other eigenvector is A^Neu-orthogonal to it; the rest
    is solved on that complement and G is returned with eigenvalue 0.
*/
inline EigenPairs deflated_lower(const Pencil& p, const Matrix& G)
{
  const Matrix Qd = complement_basis(G, p.right);
  const EigenPairs red = sym_gevp(DenseSymMatrix(Matrix(Qd.transpose() * p.left.values() * Qd)), DenseSymMatrix(Matrix(Qd.transpose() * p.right.values() * Qd)));
  const Matrix Lg = Cholesky(Matrix(G.transpose() * (p.right * G)), "G^T A^Neu G").lower();
  const Matrix Gn = Lg.triangularView<Eigen::Lower>().solve(G.transpose()).transpose();
  const Index m = G.cols(), r = red.size();
  EigenPairs out;
  out.values.resize(m + r);
  out.vectors.resize(G.rows(), m + r);
  out.values.head(m).setZero();
  out.values.tail(r) = red.values;
  out.vectors.leftCols(m) = Gn;
  out.vectors.rightCols(r) = Qd * red.vectors;
  std::vector<Index> order(static_cast<std::size_t>(m + r));
  for (Index k = 0; k < m + r; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return out.values[a] < out.values[b]; });
  EigenPairs sorted;
  sorted.values.resize(m + r);
  sorted.vectors.resize(G.rows(), m + r);
  for (Index k = 0; k < m + r; ++k) {
    sorted.values[k] = out.values[order[k]];
    sorted.vectors.col(k) = out.vectors.col(order[k]);
  }
  return sorted;
}

} // namespace detail

/// Ascending eigenpairs, vectors in local dofs.
inline EigenPairs solve_gevp(const GevpSpec& spec, const ModelSystem& ms, const Decomposition& d, const SubdomainKernel& sk)
{
  if (!(spec.threshold > 0.0)) throw Error("solve_gevp: threshold must be > 0");
  if (spec.j != sk.i) throw SizeMismatch("solve_gevp: spec is for subdomain " + std::to_string(spec.j) + ", kernel for " + std::to_string(sk.i));
  const Pencil p = assemble_pencil(spec.kind, ms, d, sk);
  if (spec.kind != GevpKind::upper_soras && sk.kernel_dim() > 0) return detail::deflated_lower(p, sk.G);
  EigenPairs ep = sym_gevp(p.left, p.right);
  if (spec.kind == GevpKind::upper_soras) ep.vectors = p.lift * ep.vectors;
  return ep;
}

/// Solve one kind on every subdomain.
inline std::vector<EigenPairs> solve_all(GevpKind kind, const ModelSystem& ms, const Decomposition& d, const std::vector<SubdomainKernel>& kernels, double threshold)
{
  std::vector<EigenPairs> out;
  out.reserve(kernels.size());
  for (const auto& sk : kernels) out.push_back(solve_gevp({kind, sk.i, threshold}, ms, d, sk));
  return out;
}

/// Indices of eigenvalues exceeding @p threshold (tie band excluded), descending by value.
inline std::vector<Index> select_above(const EigenPairs& ep, double threshold)
{
  std::vector<Index> out;
  for (Index k = ep.size() - 1; k >= 0; --k)
    if (exceeds_threshold(ep.values[k], threshold)) out.push_back(k);
  return out;
}

inline double max_eigenvalue(const std::vector<EigenPairs>& eps)
{
  double m = 0.0;
  for (const auto& ep : eps)
    if (ep.size() > 0) m = std::max(m, ep.values[ep.size() - 1]);
  return m;
}

} // namespace geneo
