#include "support.hpp"

#include "geneo/model/coefficients.hpp"
#include "geneo/model/grid_complex.hpp"
#include "geneo/model/model_system.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace geneo;

namespace {

void expect_counts(Index nx, Index ny, Index nodes, Index edges, Index faces)
{
  const auto gc = build_grid_complex(nx, ny);
  EXPECT_EQ(gc.num_nodes, nodes);
  EXPECT_EQ(gc.num_edges, edges);
  EXPECT_EQ(gc.num_faces, faces);
  const Eigen::SparseMatrix<double> cg = gc.curl * gc.grad;
  EXPECT_EQ(Matrix(cg).cwiseAbs().maxCoeff(), 0.0);
}

ModelSystem system(Index nx, Index ny, CoefficientPattern p = CoefficientPattern::constant, double rho = 1.0, double eps_ratio = 1e-6)
{
  const auto gc = build_grid_complex(nx, ny);
  return assemble_system(gc, make_coefficients(gc, p, rho, 0, eps_ratio));
}

} // namespace

TEST(GridComplex, Counts)
{
  expect_counts(1, 1, 4, 4, 1);
  expect_counts(2, 1, 6, 7, 2);
  expect_counts(3, 3, 16, 24, 9);
  expect_counts(5, 2, 18, 27, 10);
}

TEST(GridComplex, BoundarySets)
{
  const auto gc = build_grid_complex(3, 2);
  // perimeter: 2 (nx + ny) edges and nodes
  EXPECT_EQ(gc.boundary_edges.size(), 10u);
  EXPECT_EQ(gc.boundary_nodes.size(), 10u);
  for (Index e : gc.boundary_edges) {
    for (Index n : gc.edge_nodes(e)) EXPECT_TRUE(gc.is_boundary_node[n]);
  }
}

TEST(GridComplex, IncidenceEntriesAreUnit)
{
  const auto gc = build_grid_complex(4, 3);
  for (Index k = 0; k < gc.grad.outerSize(); ++k)
    for (SparseRect::InnerIterator it(gc.grad, k); it; ++it) EXPECT_EQ(std::abs(it.value()), 1.0);
  for (Index k = 0; k < gc.curl.outerSize(); ++k)
    for (SparseRect::InnerIterator it(gc.curl, k); it; ++it) EXPECT_EQ(std::abs(it.value()), 1.0);
}

TEST(Coefficients, ValuesWithinContrastRange)
{
  const auto gc = build_grid_complex(8, 8);
  for (auto p : {CoefficientPattern::constant, CoefficientPattern::channels, CoefficientPattern::checkerboard, CoefficientPattern::random_contrast}) {
    const auto cf = make_coefficients(gc, p, 1e3, 7);
    EXPECT_GE(cf.nu.minCoeff(), 1.0);
    EXPECT_LE(cf.nu.maxCoeff(), 1e3 * (1 + 1e-15));
    EXPECT_DOUBLE_EQ(cf.eps.minCoeff(), 1e-6 * cf.nu.minCoeff());
    EXPECT_DOUBLE_EQ(cf.eps.maxCoeff(), 1e-6 * cf.nu.minCoeff());
  }
  const auto ch = make_coefficients(gc, CoefficientPattern::channels, 1e3);
  EXPECT_EQ(ch.nu[gc.face(0, 1)], 1e3);
  EXPECT_EQ(ch.nu[gc.face(0, 0)], 1.0);
  EXPECT_THROW(make_coefficients(gc, CoefficientPattern::constant, 0.5), Error);
  EXPECT_EQ(parse_pattern("random"), CoefficientPattern::random_contrast);
  EXPECT_FALSE(parse_pattern("stripes").has_value());
}

TEST(Coefficients, RandomPatternIsSeeded)
{
  const auto gc = build_grid_complex(6, 6);
  const auto a = make_coefficients(gc, CoefficientPattern::random_contrast, 1e4, 3);
  const auto b = make_coefficients(gc, CoefficientPattern::random_contrast, 1e4, 3);
  const auto c = make_coefficients(gc, CoefficientPattern::random_contrast, 1e4, 4);
  EXPECT_EQ(a.nu, b.nu);
  EXPECT_NE(a.nu, c.nu);
}

TEST(AssembleSystem, SingleCellHasNoInteriorEdges)
{
  const auto ms = system(1, 1);
  EXPECT_EQ(ms.dim(), 0);
  EXPECT_EQ(ms.A.dim(), 0);
  EXPECT_EQ(ms.G.cols(), 0);
}

TEST(AssembleSystem, TwoByTwo)
{
  const auto ms = system(2, 2, CoefficientPattern::constant, 1.0, 1.0);  // nu = eps = 1
  ASSERT_EQ(ms.dim(), 4);
  ASSERT_EQ(ms.G.cols(), 1);
  const Matrix g = ms.G_dense();
  const Matrix a = ms.A.to_dense();
  const Matrix curlcurl = a - Matrix(ms.edge_mass.asDiagonal());
  EXPECT_EQ((g.transpose() * curlcurl * g)(0, 0), 0.0);
  EXPECT_EQ(g.cwiseAbs().sum(), 4.0);  // the centre node touches four interior edges
  // every interior edge of the 2x2 grid sits between two faces
  for (Index d = 0; d < 4; ++d) EXPECT_DOUBLE_EQ(a(d, d), 2.0 + 1.0);
}

TEST(AssembleSystem, SizeMismatch)
{
  const auto gc = build_grid_complex(3, 3);
  auto cf = make_coefficients(gc, CoefficientPattern::constant);
  cf.nu.resize(2);
  EXPECT_THROW(assemble_system(gc, cf), SizeMismatch);
}

TEST(AssembleSystem, ChannelsNearKernel)
{
  const auto ms = system(4, 4, CoefficientPattern::channels, 1e6);
  const Matrix a = ms.A.to_dense();
  EXPECT_NO_THROW(Cholesky(a, "A"));
  EXPECT_GT(sym_eigenvalues(a)[0], 0.0);
  const Matrix g = ms.G_dense();
  double min_rq = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < g.cols(); ++c) min_rq = std::min(min_rq, g.col(c).dot(a * g.col(c)) / g.col(c).squaredNorm());
  // g^T A g = g^T Mass g up to the rounding of the curl-curl cancellation at the scale of A
  EXPECT_LE(min_rq, ms.edge_mass.maxCoeff() + 1e-14 * ms.A.frobenius_norm());
}

TEST(AssembleSystem, CurlCurlAnnihilatesGradients)
{
  for (auto p : {CoefficientPattern::channels, CoefficientPattern::random_contrast}) {
    const auto ms = system(6, 5, p, 1e4);
    const Matrix g = ms.G_dense();
    const Matrix cc = ms.A.to_dense() - Matrix(ms.edge_mass.asDiagonal());
    const double scale = 1e-14 * ms.A.frobenius_norm();
    EXPECT_LE((g.transpose() * cc * g).cwiseAbs().maxCoeff(), scale);
    EXPECT_LE((cc * g).cwiseAbs().maxCoeff(), scale);
  }
}

TEST(NeumannMatrix, FullSetIsA)
{
  const auto ms = system(4, 3, CoefficientPattern::checkerboard, 10.0);
  std::vector<Index> all(ms.dim());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(neumann_matrix(ms, all).to_dense(), ms.A.to_dense());
  EXPECT_EQ(neumann_matrix(ms, {}).dim(), 0);
}

TEST(NeumannMatrix, LeftColumnMatchesBruteForce)
{
  const auto gc = build_grid_complex(2, 2);
  const auto cf = make_coefficients(gc, CoefficientPattern::constant, 1.0, 0, 1.0);
  const auto ms = assemble_system(gc, cf);
  // dofs of the interior edges of the faces in column i = 0
  std::vector<Index> subset;
  for (Index j = 0; j < 2; ++j)
    for (Index e : gc.face_edges(gc.face(0, j)))
      if (ms.edge_to_dof[e] >= 0 && std::find(subset.begin(), subset.end(), ms.edge_to_dof[e]) == subset.end()) subset.push_back(ms.edge_to_dof[e]);
  std::sort(subset.begin(), subset.end());
  ASSERT_EQ(subset.size(), 3u);

  // brute force: curl rows of the two left faces on the subset columns plus the edge masses
  const Matrix curl = Matrix(gc.curl);
  Matrix oracle = Matrix::Zero(3, 3);
  for (Index j = 0; j < 2; ++j) {
    const Index f = gc.face(0, j);
    Vector row(3);
    for (Index k = 0; k < 3; ++k) row[k] = curl(f, ms.interior_edges[subset[k]]);
    oracle += cf.nu[f] * row * row.transpose();
  }
  for (Index k = 0; k < 3; ++k) oracle(k, k) += cf.eps[ms.interior_edges[subset[k]]];
  EXPECT_LE((neumann_matrix(ms, subset).to_dense() - oracle).norm(), 1e-15);
}

TEST(NeumannMatrix, FacePartitionReproducesA)
{
  // element additivity: faces split into left and right halves, masses split by edge ownership
  const auto gc = build_grid_complex(6, 4);
  const auto ms = assemble_system(gc, make_coefficients(gc, CoefficientPattern::random_contrast, 1e3, 2));
  Matrix sum = Matrix::Zero(ms.dim(), ms.dim());
  std::vector<bool> mass_done(ms.dim(), false);
  for (int half = 0; half < 2; ++half) {
    std::vector<Index> faces;
    std::vector<Index> dofs;
    for (Index f = 0; f < gc.num_faces; ++f) {
      if ((gc.face_coords(f)[0] < 3) != (half == 0)) continue;
      faces.push_back(f);
      for (Index d : ms.faces[f].dofs)
        if (d >= 0) dofs.push_back(d);
    }
    std::sort(dofs.begin(), dofs.end());
    dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
    const Matrix loc = assemble_local(ms, dofs, faces, false).to_dense();
    for (std::size_t r = 0; r < dofs.size(); ++r)
      for (std::size_t c = 0; c < dofs.size(); ++c) sum(dofs[r], dofs[c]) += loc(r, c);
    for (Index d : dofs)
      if (!mass_done[d]) sum(d, d) += ms.edge_mass[d], mass_done[d] = true;
  }
  EXPECT_LE((sum - ms.A.to_dense()).norm(), 1e-12 * ms.A.frobenius_norm());
}

TEST(NeumannMatrix, PositiveDefiniteWithMass)
{
  const auto ms = system(5, 5, CoefficientPattern::channels, 1e6);
  const std::vector<Index> subset{0, 1, 2, 3, 4, 5, 10, 11, 12};
  const Matrix n = neumann_matrix(ms, subset).to_dense();
  EXPECT_GT(sym_eigenvalues(n)[0], 0.0);
  EXPECT_THROW(neumann_matrix(ms, std::vector<Index>{ms.dim()}), SizeMismatch);
}
