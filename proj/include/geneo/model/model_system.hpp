#pragma once

/** @file model_system.hpp
    @brief Curl-curl plus mass system on interior edges with its gradient near-kernel.

    A = sum_f nu_f c_f^T c_f + sum_e eps_e e_e e_e^T, where c_f is row f of the
    curl incidence, restricted to interior (non-Dirichlet) edges. G holds the
    gradients of interior nodes restricted to interior edges, so curl G = 0 and
    g^T A g = g^T Mass(eps) g for every column g.
*/

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"
#include "geneo/core/sparse.hpp"
#include "geneo/model/coefficients.hpp"
#include "geneo/model/grid_complex.hpp"

#include <Eigen/Sparse>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace geneo {

/// Curl-curl contribution of one face, in interior-dof numbering (-1 = eliminated edge).
struct FaceElement {
  std::array<Index, 4> dofs{};
  std::array<double, 4> signs{};
  double nu = 0.0;

  bool has_interior_dof() const
  {
    for (auto d : dofs)
      if (d >= 0) return true;
    return false;
  }
};

struct ModelSystem {
  SparseSymMatrix A;
  Eigen::SparseMatrix<double> G;        ///< dim x #interior nodes
  std::vector<Index> interior_edges;    ///< dof -> grid edge
  std::vector<Index> interior_nodes;    ///< G column -> grid node
  std::vector<Index> edge_to_dof;       ///< grid edge -> dof or -1
  std::vector<Index> node_to_column;    ///< grid node -> G column or -1
  std::vector<FaceElement> faces;       ///< one per grid face
  Vector edge_mass;                     ///< eps per dof

  Index dim() const { return static_cast<Index>(interior_edges.size()); }
  Matrix G_dense() const { return Matrix(G); }
};

namespace detail {

inline void add_face(SparseSymMatrix& m, const FaceElement& fe, const std::vector<Index>& to_local)
{
  for (int a = 0; a < 4; ++a) {
    if (fe.dofs[a] < 0) continue;
    const Index la = to_local[fe.dofs[a]];
    for (int b = a; b < 4; ++b) {
      if (fe.dofs[b] < 0) continue;
      const Index lb = to_local[fe.dofs[b]];
      const double v = fe.nu * fe.signs[a] * fe.signs[b];
      // diagonal once, off-diagonal once (mirror is implicit)
      m.add(la, lb, v);
    }
  }
}

} // namespace detail

inline ModelSystem assemble_system(const GridComplex& gc, const CoefficientField& cf)
{
  if (cf.nu.size() != gc.num_faces)
    throw SizeMismatch("assemble_system: nu has " + std::to_string(cf.nu.size()) + " entries, grid has " + std::to_string(gc.num_faces) + " faces");
  if (cf.eps.size() != gc.num_edges)
    throw SizeMismatch("assemble_system: eps has " + std::to_string(cf.eps.size()) + " entries, grid has " + std::to_string(gc.num_edges) + " edges");

  ModelSystem ms;
  ms.edge_to_dof.assign(gc.num_edges, -1);
  for (Index e = 0; e < gc.num_edges; ++e)
    if (!gc.is_boundary_edge[e]) {
      ms.edge_to_dof[e] = static_cast<Index>(ms.interior_edges.size());
      ms.interior_edges.push_back(e);
    }
  ms.node_to_column.assign(gc.num_nodes, -1);
  for (Index n = 0; n < gc.num_nodes; ++n)
    if (!gc.is_boundary_node[n]) {
      ms.node_to_column[n] = static_cast<Index>(ms.interior_nodes.size());
      ms.interior_nodes.push_back(n);
    }

  const Index n = ms.dim();
  ms.faces.resize(gc.num_faces);
  for (Index f = 0; f < gc.num_faces; ++f) {
    const auto edges = gc.face_edges(f);
    auto& fe = ms.faces[f];
    fe.signs = GridComplex::face_signs();
    fe.nu = cf.nu[f];
    for (int k = 0; k < 4; ++k) fe.dofs[k] = ms.edge_to_dof[edges[k]];
  }
  ms.edge_mass.resize(n);
  for (Index d = 0; d < n; ++d) ms.edge_mass[d] = cf.eps[ms.interior_edges[d]];

  std::vector<Index> identity(n);
  for (Index d = 0; d < n; ++d) identity[d] = d;
  ms.A = SparseSymMatrix(n);
  for (const auto& fe : ms.faces) detail::add_face(ms.A, fe, identity);
  for (Index d = 0; d < n; ++d) ms.A.add(d, d, ms.edge_mass[d]);
  ms.A.finalize();

  std::vector<Eigen::Triplet<double>> gt;
  for (Index d = 0; d < n; ++d) {
    const Index e = ms.interior_edges[d];
    for (SparseRect::InnerIterator it(gc.grad, e); it; ++it) {
      const Index col = ms.node_to_column[it.col()];
      if (col >= 0) gt.emplace_back(d, col, it.value());
    }
  }
  ms.G.resize(n, static_cast<Index>(ms.interior_nodes.size()));
  ms.G.setFromTriplets(gt.begin(), gt.end());
  return ms;
}

/** @brief Assemble the requested faces and edge masses on a subset of dofs.

    Output numbering follows @p edge_subset. Faces must only touch dofs in the
    subset (eliminated edges are ignored).
*/
inline SparseSymMatrix assemble_local(const ModelSystem& ms, std::span<const Index> edge_subset, std::span<const Index> face_ids, bool with_mass = true)
{
  std::vector<Index> to_local(ms.dim(), -1);
  for (std::size_t k = 0; k < edge_subset.size(); ++k) to_local[edge_subset[k]] = static_cast<Index>(k);
  SparseSymMatrix m(static_cast<Index>(edge_subset.size()));
  for (Index f : face_ids) {
    for (auto d : ms.faces[f].dofs)
      if (d >= 0 && to_local[d] < 0) throw Error("assemble_local: face " + std::to_string(f) + " touches a dof outside the subset");
    detail::add_face(m, ms.faces[f], to_local);
  }
  if (with_mass)
    for (std::size_t k = 0; k < edge_subset.size(); ++k) m.add(static_cast<Index>(k), static_cast<Index>(k), ms.edge_mass[edge_subset[k]]);
  m.finalize();
  return m;
}

/// Faces having at least one interior dof, all of them inside the subset.
inline std::vector<Index> faces_inside(const ModelSystem& ms, std::span<const Index> edge_subset)
{
  std::vector<bool> in(ms.dim(), false);
  for (Index d : edge_subset) in[d] = true;
  std::vector<Index> out;
  for (Index f = 0; f < static_cast<Index>(ms.faces.size()); ++f) {
    const auto& fe = ms.faces[f];
    if (!fe.has_interior_dof()) continue;
    bool all = true;
    for (auto d : fe.dofs)
      if (d >= 0 && !in[d]) all = false;
    if (all) out.push_back(f);
  }
  return out;
}

/// Neumann matrix of a dof subset: faces entirely inside the subset plus the
/// mass of every subset edge. Numbering follows @p edge_subset.
inline SparseSymMatrix neumann_matrix(const ModelSystem& ms, std::span<const Index> edge_subset)
{
  for (Index d : edge_subset)
    if (d < 0 || d >= ms.dim()) throw SizeMismatch("neumann_matrix: dof " + std::to_string(d) + " is not an interior edge");
  const auto faces = faces_inside(ms, edge_subset);
  return assemble_local(ms, edge_subset, faces, true);
}

} // namespace geneo
