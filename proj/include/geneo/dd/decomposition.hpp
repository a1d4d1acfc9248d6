#pragma once

/** @file decomposition.hpp
    @brief Overlapping face-based decomposition with multiplicity partition of unity.

    Faces are split into a px x py Cartesian grid of blocks. Each block is grown
    by `overlap` layers of face adjacency (a face joins when it shares at least
    a node with the current set, which keeps every subdomain a rectangle). The
    dofs of a subdomain are the interior edges of its faces.
*/

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"
#include "geneo/core/sparse.hpp"
#include "geneo/model/grid_complex.hpp"
#include "geneo/model/model_system.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace geneo {

struct Decomposition {
  Index N = 0;
  Index px = 0, py = 0, overlap = 0;
  Index global_dim = 0;
  std::vector<std::vector<Index>> faces;     ///< grid faces of each subdomain
  std::vector<std::vector<Index>> dof_sets;  ///< sorted global dofs of each subdomain
  std::vector<Vector> D;                     ///< partition-of-unity weights per local dof
  std::vector<int> multiplicity;             ///< per global dof
  std::vector<SparseSymMatrix> A_neu;
  std::vector<std::vector<Index>> neighbours; ///< A-coupled subdomains (excluding self)
  int k0 = 1;
  int k1 = 1;

  Index local_dim(Index i) const { return static_cast<Index>(dof_sets[i].size()); }

  /// R_i x
  template <class Derived>
  Matrix restrict_to(Index i, const Eigen::MatrixBase<Derived>& x) const
  {
    const auto& s = dof_sets[i];
    Matrix y(static_cast<Index>(s.size()), x.cols());
    for (std::size_t k = 0; k < s.size(); ++k) y.row(k) = x.row(s[k]);
    return y;
  }

  /// out += R_i^T y
  template <class Derived>
  void add_extension(Index i, const Eigen::MatrixBase<Derived>& y, Matrix& out) const
  {
    const auto& s = dof_sets[i];
    for (std::size_t k = 0; k < s.size(); ++k) out.row(s[k]) += y.row(k);
  }

  /// R_i^T y as a global block.
  template <class Derived>
  Matrix extend(Index i, const Eigen::MatrixBase<Derived>& y) const
  {
    Matrix out = Matrix::Zero(global_dim, y.cols());
    add_extension(i, y, out);
    return out;
  }

  /// Dense R_i A R_i^T.
  DenseSymMatrix dirichlet_matrix(const SparseSymMatrix& A, Index i) const { return A.principal_submatrix(dof_sets[i]); }

  DenseSymMatrix neumann_dense(Index i) const { return DenseSymMatrix(A_neu[i].to_dense()); }
};

namespace detail {

/// Greedy coloring in vertex order; returns the number of colors.
inline int greedy_color_count(const std::vector<std::vector<Index>>& adj)
{
  const Index n = static_cast<Index>(adj.size());
  std::vector<int> color(n, -1);
  int used = 0;
  for (Index v = 0; v < n; ++v) {
    std::vector<bool> taken(n + 1, false);
    for (Index w : adj[v])
      if (color[w] >= 0) taken[color[w]] = true;
    int c = 0;
    while (taken[c]) ++c;
    color[v] = c;
    used = std::max(used, c + 1);
  }
  return used;
}

} // namespace detail

/** @brief Build the decomposition and its constants.

    k1 is the largest dof multiplicity. k0 is a greedy coloring of the graph in
    which subdomains i and j are linked when some dof of i and some dof of j are
    coupled by A (shared dofs included); any two subdomains of one color then
    have A-orthogonal extensions.
*/
inline Decomposition decompose(const ModelSystem& ms, const GridComplex& gc, Index px, Index py, Index overlap)
{
  if (px < 1 || py < 1) throw SizeMismatch("decompose: px, py must be >= 1");
  if (px > gc.nx || py > gc.ny)
    throw SizeMismatch("decompose: " + std::to_string(px) + "x" + std::to_string(py) + " subdomains exceed the " + std::to_string(gc.nx) + "x" +
                       std::to_string(gc.ny) + " face grid");
  if (overlap < 1) throw SizeMismatch("decompose: overlap must be >= 1");

  Decomposition d;
  d.px = px;
  d.py = py;
  d.overlap = overlap;
  d.N = px * py;
  d.global_dim = ms.dim();
  d.faces.resize(d.N);
  d.dof_sets.resize(d.N);

  for (Index by = 0; by < py; ++by)
    for (Index bx = 0; bx < px; ++bx) {
      const Index s = by * px + bx;
      // block bx owns face columns i with i*px/nx == bx
      Index i0 = (bx * gc.nx + px - 1) / px, i1 = ((bx + 1) * gc.nx + px - 1) / px;
      Index j0 = (by * gc.ny + py - 1) / py, j1 = ((by + 1) * gc.ny + py - 1) / py;
      i0 = std::max<Index>(0, i0 - overlap);
      j0 = std::max<Index>(0, j0 - overlap);
      i1 = std::min<Index>(gc.nx, i1 + overlap);
      j1 = std::min<Index>(gc.ny, j1 + overlap);
      std::set<Index> dofs;
      for (Index j = j0; j < j1; ++j)
        for (Index i = i0; i < i1; ++i) {
          const Index f = gc.face(i, j);
          d.faces[s].push_back(f);
          for (auto dof : ms.faces[f].dofs)
            if (dof >= 0) dofs.insert(dof);
        }
      if (dofs.empty()) throw EmptySubdomain("decompose: subdomain " + std::to_string(s) + " has no interior edges");
      d.dof_sets[s].assign(dofs.begin(), dofs.end());
    }

  d.multiplicity.assign(d.global_dim, 0);
  for (const auto& s : d.dof_sets)
    for (Index e : s) ++d.multiplicity[e];
  d.k1 = 0;
  for (Index e = 0; e < d.global_dim; ++e) {
    if (d.multiplicity[e] == 0) throw Error("decompose: dof " + std::to_string(e) + " is not covered");
    d.k1 = std::max(d.k1, d.multiplicity[e]);
  }

  d.D.resize(d.N);
  d.A_neu.reserve(d.N);
  for (Index s = 0; s < d.N; ++s) {
    d.D[s].resize(d.local_dim(s));
    for (Index k = 0; k < d.local_dim(s); ++k) d.D[s][k] = 1.0 / d.multiplicity[d.dof_sets[s][k]];
    d.A_neu.push_back(neumann_matrix(ms, d.dof_sets[s]));
  }

  // dof -> set of A-neighbour dofs (including itself)
  std::vector<std::vector<Index>> owners(d.global_dim);
  for (Index s = 0; s < d.N; ++s)
    for (Index e : d.dof_sets[s]) owners[e].push_back(s);
  std::vector<std::set<Index>> links(d.N);
  auto link = [&](Index a, Index b) {
    for (Index s : owners[a])
      for (Index t : owners[b])
        if (s != t) {
          links[s].insert(t);
          links[t].insert(s);
        }
  };
  for (const auto& t : ms.A.upper_entries())
    if (t.value != 0.0) link(t.row, t.col);
  d.neighbours.resize(d.N);
  for (Index s = 0; s < d.N; ++s) d.neighbours[s].assign(links[s].begin(), links[s].end());
  d.k0 = detail::greedy_color_count(d.neighbours);
  return d;
}

struct PouReport {
  double max_error = 0.0;
  bool passed() const { return max_error <= 1e-15; }
};

/// max |(sum_i R_i^T D_i R_i - I)_ee|; the operator is diagonal, so this is its max entry error.
inline PouReport verify_pou(const Decomposition& d)
{
  Vector sum = Vector::Zero(d.global_dim);
  for (Index s = 0; s < d.N; ++s)
    for (Index k = 0; k < d.local_dim(s); ++k) sum[d.dof_sets[s][k]] += d.D[s][k];
  PouReport r;
  for (Index e = 0; e < d.global_dim; ++e) r.max_error = std::max(r.max_error, std::abs(sum[e] - 1.0));
  return r;
}

/// Histogram multiplicity -> dof count.
inline std::map<int, Index> multiplicity_histogram(const Decomposition& d)
{
  std::map<int, Index> h;
  for (int m : d.multiplicity) ++h[m];
  return h;
}

} // namespace geneo
