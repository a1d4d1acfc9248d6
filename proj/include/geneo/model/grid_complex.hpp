#pragma once

/** @file grid_complex.hpp
    @brief Lowest-order de Rham complex on a structured nx x ny grid.

    Numbering:
      node (i,j)              -> j*(nx+1) + i,           0 <= i <= nx, 0 <= j <= ny
      horizontal edge (i,j)   -> j*nx + i,               (i,j) -> (i+1,j)
      vertical edge (i,j)     -> nx*(ny+1) + j*(nx+1)+i, (i,j) -> (i,j+1)
      face (i,j)              -> j*nx + i
    Edges are oriented from the lower-index node to the higher one. Face
    circulation is counter-clockwise: bottom +1, right +1, top -1, left -1.
*/

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"

#include <Eigen/Sparse>

#include <array>
#include <string>
#include <vector>

namespace geneo {

using SparseRect = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct GridComplex {
  Index nx = 0;
  Index ny = 0;
  Index num_nodes = 0;
  Index num_edges = 0;
  Index num_faces = 0;
  SparseRect grad;  ///< num_edges x num_nodes
  SparseRect curl;  ///< num_faces x num_edges
  std::vector<Index> boundary_edges;
  std::vector<Index> boundary_nodes;
  std::vector<bool> is_boundary_edge;
  std::vector<bool> is_boundary_node;

  Index node(Index i, Index j) const { return j * (nx + 1) + i; }
  Index horizontal_edge(Index i, Index j) const { return j * nx + i; }
  Index vertical_edge(Index i, Index j) const { return nx * (ny + 1) + j * (nx + 1) + i; }
  Index face(Index i, Index j) const { return j * nx + i; }

  /// Edges of face (i,j) in the order bottom, right, top, left.
  std::array<Index, 4> face_edges(Index f) const
  {
    const Index i = f % nx, j = f / nx;
    return {horizontal_edge(i, j), vertical_edge(i + 1, j), horizontal_edge(i, j + 1), vertical_edge(i, j)};
  }
  static constexpr std::array<double, 4> face_signs() { return {1.0, 1.0, -1.0, -1.0}; }

  /// (tail, head) of an edge.
  std::array<Index, 2> edge_nodes(Index e) const
  {
    const Index nh = nx * (ny + 1);
    if (e < nh) {
      const Index i = e % nx, j = e / nx;
      return {node(i, j), node(i + 1, j)};
    }
    const Index k = e - nh;
    const Index i = k % (nx + 1), j = k / (nx + 1);
    return {node(i, j), node(i, j + 1)};
  }

  /// Face coordinates (i,j) of face f.
  std::array<Index, 2> face_coords(Index f) const { return {f % nx, f / nx}; }
};

inline GridComplex build_grid_complex(Index nx, Index ny)
{
  if (nx < 1 || ny < 1) throw SizeMismatch("build_grid_complex: nx, ny must be >= 1 (got " + std::to_string(nx) + ", " + std::to_string(ny) + ")");
  GridComplex gc;
  gc.nx = nx;
  gc.ny = ny;
  gc.num_nodes = (nx + 1) * (ny + 1);
  gc.num_edges = nx * (ny + 1) + ny * (nx + 1);
  gc.num_faces = nx * ny;

  std::vector<Eigen::Triplet<double>> gt;
  gt.reserve(2 * gc.num_edges);
  gc.is_boundary_edge.assign(gc.num_edges, false);
  for (Index e = 0; e < gc.num_edges; ++e) {
    const auto [tail, head] = gc.edge_nodes(e);
    gt.emplace_back(e, tail, -1.0);
    gt.emplace_back(e, head, 1.0);
    const Index ti = tail % (nx + 1), tj = tail / (nx + 1);
    const Index hi = head % (nx + 1), hj = head / (nx + 1);
    // an edge is on the boundary when both endpoints lie on the same boundary side
    const bool bottom = tj == 0 && hj == 0, top = tj == ny && hj == ny;
    const bool left = ti == 0 && hi == 0, right = ti == nx && hi == nx;
    if (bottom || top || left || right) {
      gc.is_boundary_edge[e] = true;
      gc.boundary_edges.push_back(e);
    }
  }
  gc.grad.resize(gc.num_edges, gc.num_nodes);
  gc.grad.setFromTriplets(gt.begin(), gt.end());

  std::vector<Eigen::Triplet<double>> ct;
  ct.reserve(4 * gc.num_faces);
  for (Index f = 0; f < gc.num_faces; ++f) {
    const auto edges = gc.face_edges(f);
    const auto signs = GridComplex::face_signs();
    for (int k = 0; k < 4; ++k) ct.emplace_back(f, edges[k], signs[k]);
  }
  gc.curl.resize(gc.num_faces, gc.num_edges);
  gc.curl.setFromTriplets(ct.begin(), ct.end());

  gc.is_boundary_node.assign(gc.num_nodes, false);
  for (Index j = 0; j <= ny; ++j)
    for (Index i = 0; i <= nx; ++i)
      if (i == 0 || j == 0 || i == nx || j == ny) {
        gc.is_boundary_node[gc.node(i, j)] = true;
        gc.boundary_nodes.push_back(gc.node(i, j));
      }
  return gc;
}

} // namespace geneo
