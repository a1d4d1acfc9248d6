#include "support.hpp"

#include "geneo/dd/decomposition.hpp"

#include <gtest/gtest.h>

using namespace geneo;
using geneo::testing::cached_problem;

namespace {

Problem problem(Index nx, Index ny, Index px, Index py, Index overlap = 1, CoefficientPattern p = CoefficientPattern::constant, double rho = 1.0)
{
  ProblemConfig pc;
  pc.nx = nx;
  pc.ny = ny;
  pc.pattern = p;
  pc.contrast = rho;
  pc.px = px;
  pc.py = py;
  pc.overlap = overlap;
  return build_problem(pc);
}

} // namespace

TEST(Decompose, SingleSubdomain)
{
  const auto p = problem(4, 3, 1, 1);
  const auto& d = p.d;
  EXPECT_EQ(d.N, 1);
  EXPECT_EQ(d.k0, 1);
  EXPECT_EQ(d.k1, 1);
  EXPECT_EQ(d.local_dim(0), p.ms.dim());
  EXPECT_EQ(d.D[0], Vector::Ones(p.ms.dim()));
  EXPECT_EQ(d.A_neu[0].to_dense(), p.ms.A.to_dense());
  EXPECT_EQ(verify_pou(d).max_error, 0.0);
}

TEST(Decompose, StripMultiplicities)
{
  // 4x1 strip: only the three inner vertical edges are dofs; with one layer of
  // overlap both halves cover faces 0..2 and 1..3, hence all three edges.
  const auto p = problem(4, 1, 2, 1);
  const auto& d = p.d;
  ASSERT_EQ(p.ms.dim(), 3);
  EXPECT_EQ(d.faces[0], (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(d.faces[1], (std::vector<Index>{1, 2, 3}));
  for (int m : d.multiplicity) EXPECT_EQ(m, 2);
  for (Index s = 0; s < 2; ++s)
    for (Index k = 0; k < d.local_dim(s); ++k) EXPECT_EQ(d.D[s][k], 0.5);
  EXPECT_EQ(verify_pou(d).max_error, 0.0);
  EXPECT_EQ(d.k1, 2);
}

TEST(Decompose, FourByFourTwoByTwo)
{
  const auto p = problem(4, 4, 2, 2);
  const auto& d = p.d;
  EXPECT_EQ(d.N, 4);
  // every pair of subdomains shares dofs around the centre node
  for (Index a = 0; a < 4; ++a)
    for (Index b = a + 1; b < 4; ++b) {
      std::vector<Index> common;
      std::set_intersection(d.dof_sets[a].begin(), d.dof_sets[a].end(), d.dof_sets[b].begin(), d.dof_sets[b].end(), std::back_inserter(common));
      EXPECT_FALSE(common.empty()) << a << "," << b;
    }
  EXPECT_EQ(d.k0, 4);
  EXPECT_LE(d.k1, 4);
}

TEST(Decompose, CoverSortedAndConstants)
{
  for (Index ov : {1, 2}) {
    const auto& p = cached_problem(16, 16, CoefficientPattern::channels, 1.0, 4, 2, ov);
    const auto& d = p.d;
    std::vector<int> count(d.global_dim, 0);
    for (const auto& s : d.dof_sets) {
      EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
      for (Index e : s) ++count[e];
    }
    int max_mult = 0;
    for (Index e = 0; e < d.global_dim; ++e) {
      EXPECT_GE(count[e], 1);
      EXPECT_EQ(count[e], d.multiplicity[e]);
      max_mult = std::max(max_mult, count[e]);
    }
    EXPECT_EQ(d.k1, max_mult);
    EXPECT_TRUE(verify_pou(d).passed());
    // the greedy colour count bounds the clique number from above: each
    // subdomain with all its neighbours needs deg+1 colours at most
    std::size_t max_deg = 0;
    for (const auto& nb : d.neighbours) max_deg = std::max(max_deg, nb.size());
    EXPECT_LE(d.k0, static_cast<int>(max_deg) + 1);
    EXPECT_GE(d.k0, 2);
  }
}

TEST(Decompose, Errors)
{
  const auto gc = build_grid_complex(4, 4);
  const auto ms = assemble_system(gc, make_coefficients(gc, CoefficientPattern::constant));
  EXPECT_THROW(decompose(ms, gc, 0, 1, 1), SizeMismatch);
  EXPECT_THROW(decompose(ms, gc, 5, 1, 1), SizeMismatch);
  EXPECT_THROW(decompose(ms, gc, 2, 2, 0), SizeMismatch);
  const auto gc1 = build_grid_complex(1, 1);
  const auto ms1 = assemble_system(gc1, make_coefficients(gc1, CoefficientPattern::constant));
  EXPECT_THROW(decompose(ms1, gc1, 1, 1, 1), EmptySubdomain);
}

TEST(Decompose, GreedyColouring)
{
  // triangle plus a pendant vertex
  const std::vector<std::vector<Index>> adj{{1, 2}, {0, 2}, {0, 1, 3}, {2}};
  EXPECT_EQ(detail::greedy_color_count(adj), 3);
  EXPECT_EQ(detail::greedy_color_count({{}, {}}), 1);
}

TEST(VerifyPou, CorruptedWeightsReported)
{
  auto p = problem(6, 6, 2, 2);
  EXPECT_TRUE(verify_pou(p.d).passed());
  p.d.D[1][3] *= 1.5;
  const auto r = verify_pou(p.d);
  EXPECT_FALSE(r.passed());
  EXPECT_GT(r.max_error, 0.0);
}

TEST(Decompose, MultiplicityHistogram)
{
  const auto p = problem(4, 1, 2, 1);
  const auto h = multiplicity_histogram(p.d);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.at(2), 3);
}

TEST(Decompose, RestrictionAndExtensionAreAdjoint)
{
  const auto& p = cached_problem(8, 8, CoefficientPattern::channels, 1e3, 2, 2);
  const Matrix x = random_matrix(p.d.global_dim, 2, 1);
  for (Index i = 0; i < p.d.N; ++i) {
    const Matrix y = random_matrix(p.d.local_dim(i), 2, 2 + i);
    EXPECT_NEAR((p.d.restrict_to(i, x).transpose() * y).trace(), (x.transpose() * p.d.extend(i, y)).trace(), 1e-12);
  }
}

// ||sum_i R_i^T U_i||_A^2 <= k0 sum_i ||R_i^T U_i||_A^2
TEST(DecompositionInequalities, ColouringConstant)
{
  for (const Problem* pp : {&cached_problem(8, 8, CoefficientPattern::channels, 1e3, 2, 2), &cached_problem(16, 16, CoefficientPattern::random_contrast, 1e6, 4, 2, 2)}) {
    const auto& p = *pp;
    for (std::uint64_t draw = 0; draw < 100; ++draw) {
      Vector total = Vector::Zero(p.d.global_dim);
      double parts = 0.0;
      for (Index i = 0; i < p.d.N; ++i) {
        const Vector ext = p.d.extend(i, random_vector(p.d.local_dim(i), 1000 * draw + i));
        total += ext;
        parts += ext.dot(p.ms.A.multiply(ext));
      }
      EXPECT_LE(total.dot(p.ms.A.multiply(total)), p.d.k0 * parts * (1 + 1e-12));
    }
  }
}

// sum_j (A_j^Neu R_j U, R_j U) <= k1 (A U, U)
TEST(DecompositionInequalities, MultiplicityConstant)
{
  for (const Problem* pp : {&cached_problem(8, 8, CoefficientPattern::channels, 1e3, 2, 2), &cached_problem(16, 16, CoefficientPattern::random_contrast, 1e6, 4, 2, 2)}) {
    const auto& p = *pp;
    for (std::uint64_t draw = 0; draw < 100; ++draw) {
      const Vector u = random_vector(p.d.global_dim, 77 + draw);
      double local = 0.0;
      for (Index j = 0; j < p.d.N; ++j) {
        const Vector uj = p.d.restrict_to(j, u);
        local += uj.dot(p.d.A_neu[j].multiply(uj));
      }
      EXPECT_LE(local, p.d.k1 * u.dot(p.ms.A.multiply(u)) * (1 + 1e-12));
    }
  }
}
