#include "oracle.hpp"
#include "support.hpp"

#include "geneo/precond/bounds.hpp"
#include "geneo/precond/preconditioner.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace geneo;
using geneo::testing::cached_problem;
using geneo::testing::desk;
using geneo::testing::method;
using geneo::testing::rel_diff;
using namespace geneo::testing::oracle;

namespace {


MethodConfig config(Variant v, const char* inexact = "exact")
{
  // inexact variants use a nontrivial surrogate on the default basis
  return method(v, 0.5, is_inexact(v) ? inexact : "exact");
}

void expect_dense_agreement(const Problem& p, double tol)
{
  for (Variant v : kAllVariants)
    for (const char* inexact : {"scaled:2", "block_jacobi:3", "jacobi"}) {
      if (!is_inexact(v) && std::string(inexact) != "scaled:2") continue;
      const auto s = build_method(p, config(v, inexact));
      const Preconditioner M = s.preconditioner(p.d);
      const Matrix dense = dense_preconditioner(p, s);
      const Matrix x = random_matrix(p.d.global_dim, 20, 11);
      const Matrix mx = M.apply(x), dx = dense * x;
      for (Index c = 0; c < x.cols(); ++c) EXPECT_LE(rel_diff(Matrix(mx.col(c)), Matrix(dx.col(c))), tol) << to_string(v) << " " << inexact;
    }
}

} // namespace

TEST(Preconditioner, MatchesDenseAssembly) { expect_dense_agreement(mild_desk(), 1e-11); }

TEST(Preconditioner, MatchesDenseAssemblyToConditioningFloor)
{
  // both evaluations carry u cond(A) error at the default mass ratio
  const auto& p = desk(1e3);
  expect_dense_agreement(p, kRound * condition(p.ms.A.to_dense()));
}

TEST(Preconditioner, SymmetricPositiveDefinite)
{
  for (const Problem* pp : {&mild_desk(), &desk(1e3), &desk(1e6)}) {
    const auto& p = *pp;
    for (Variant v : kAllVariants) {
      const auto s = build_method(p, config(v, "block_jacobi:3"));
      const Preconditioner M = s.preconditioner(p.d);
      const Matrix x = random_matrix(p.d.global_dim, 20, 3), y = random_matrix(p.d.global_dim, 20, 4);
      const Matrix mx = M.apply(x), my = M.apply(y);
      for (Index c = 0; c < x.cols(); ++c) {
        EXPECT_LE(std::abs(mx.col(c).dot(y.col(c)) - x.col(c).dot(my.col(c))), 1e-11 * mx.col(c).norm() * y.col(c).norm()) << to_string(v);
        EXPECT_GT(mx.col(c).dot(x.col(c)), 0.0) << to_string(v);
      }
      const Matrix dense = dense_operator(M);
      EXPECT_GT(sym_eigenvalues(0.5 * (dense + dense.transpose()))[0], 0.0) << to_string(v);
    }
  }
}

TEST(Preconditioner, SingleSubdomainWithoutCoarseSpaceIsInverse)
{
  ProblemConfig pc;
  pc.nx = pc.ny = 6;
  pc.pattern = CoefficientPattern::checkerboard;
  pc.contrast = 10.0;
  pc.eps_ratio = 1e-2;
  pc.px = pc.py = 1;
  const auto p = build_problem(pc);
  KernelOptions ko;
  ko.use_near_kernel = false;
  const auto kernels = build_kernels(p.ms, p.d, ko);
  const CoarseSpace empty;
  const Preconditioner M(Variant::AS2, p.d, kernels, empty);
  const Vector b = random_vector(p.d.global_dim, 1);
  const Vector x = M.apply(b);
  EXPECT_LE((p.ms.A.multiply(x) - b).norm(), 1e-12 * b.norm());
  // with D = I and B = R A R^T, SORAS coincides
  const Preconditioner S(Variant::SORAS2, p.d, kernels, empty);
  EXPECT_LE(rel_diff(Matrix(S.apply(b)), Matrix(x)), 1e-14);
}

TEST(Preconditioner, FixesCoarseSpace)
{
  const auto& p = mild_desk();
  for (Variant v : {Variant::AS2, Variant::SORAS2}) {
    const auto s = build_method(p, config(v));
    const Preconditioner M = s.preconditioner(p.d);
    const Matrix zc = s.cs.Z * random_matrix(s.cs.dim(), 3, 5);
    // M^{-1} A (Z c) = Z c since (I - P0^T) A Z = 0
    const Matrix r = M.apply(Matrix(p.ms.A.multiply(zc)));
    EXPECT_LE(rel_diff(s.cs.P0(r), zc), 1e-10) << to_string(v);
    EXPECT_LE(rel_diff(r, zc), 1e-10) << to_string(v);
  }
}

TEST(Preconditioner, SorasSimplifiedFormEqualsUnsimplified)
{
  for (const Problem* pp : {&mild_desk(), &desk(1e3)}) {
    const auto& p = *pp;
    for (LocalSolver solver : {LocalSolver::neumann, LocalSolver::dirichlet}) {
      auto mc = config(Variant::SORAS2);
      mc.soras_solver = solver;
      const auto s = build_method(p, mc);
      const Matrix x = random_matrix(p.d.global_dim, 20, 8);
      const Matrix a = s.preconditioner(p.d, SorasLocalForm::simplified).apply(x);
      const Matrix b = s.preconditioner(p.d, SorasLocalForm::unsimplified).apply(x);
      const double tol = pp == &mild_desk() ? 1e-11 : kRound * condition(p.ms.A.to_dense());
      for (Index c = 0; c < x.cols(); ++c) EXPECT_LE(rel_diff(Matrix(a.col(c)), Matrix(b.col(c))), tol);
    }
  }
}

TEST(Preconditioner, ExactSurrogateIsExactVariant)
{
  const auto& p = desk(1e3);
  for (auto [exact, inexact] : {std::pair{Variant::AS2, Variant::AS2_inexact}}) {
    const auto se = build_method(p, config(exact));
    const auto si = build_method(p, method(inexact, 0.5, "exact"));
    const Matrix x = random_matrix(p.d.global_dim, 20, 9);
    EXPECT_LE(rel_diff(si.preconditioner(p.d).apply(x), se.preconditioner(p.d).apply(x)), 1e-12);
  }
}

TEST(Preconditioner, DoubledSurrogateHalvesCoarseComponent)
{
  const auto& p = desk(1e3);
  const auto s = build_method(p, method(Variant::AS2_inexact, 0.5, "scaled:2"));
  const Matrix x = random_matrix(p.d.global_dim, 5, 10);
  EXPECT_LE(rel_diff(s.cs.coarse_solve(x, true), 0.5 * s.cs.coarse_solve(x, false)), 1e-12);
  const Matrix dense = dense_operator(s.preconditioner(p.d));
  EXPECT_GT(sym_eigenvalues(0.5 * (dense + dense.transpose()))[0], 0.0);
}

TEST(Preconditioner, SorasInexactWithoutUpperFilterIsUnsimplifiedSoras)
{
  // gamma beyond the spectrum: eta = 0 and the coarse space has no upper vectors
  for (const Problem* pp : {&mild_desk(), &desk(1e3)}) {
    const auto& p = *pp;
    auto mc = method(Variant::SORAS2_inexact, 0.5, "exact");
    mc.gamma = 1e300;
    const auto s = build_method(p, mc);
    for (const auto& ss : s.soras) EXPECT_EQ(ss.V_gamma.cols(), 0);
    const Preconditioner exact(Variant::SORAS2, p.d, s.kernels, s.cs, nullptr, SorasLocalForm::unsimplified);
    const Matrix x = random_matrix(p.d.global_dim, 20, 12);
    const double tol = pp == &mild_desk() ? 1e-11 : kRound * condition(p.ms.A.to_dense());
    EXPECT_LE(rel_diff(s.preconditioner(p.d).apply(x), exact.apply(x)), tol);
  }
}

TEST(Preconditioner, SorasInexactLocalSolvesAvoidFilteredSpaces)
{
  const auto& p = desk(1e3);
  auto mc = method(Variant::SORAS2_inexact, 0.5, "jacobi");
  mc.gamma = 0.5;
  const auto s = build_method(p, mc);
  bool any_eta = false;
  for (Index i = 0; i < p.d.N; ++i) {
    const auto& ss = s.soras[i];
    const auto& sk = s.kernels[i];
    any_eta = any_eta || ss.V_gamma.cols() > 0;
    const Matrix v = random_matrix(sk.dim(), 10, 20 + i);
    const Matrix z = ss.B_tilde_dag(v);
    const Matrix bz = sk.B * z;
    EXPECT_LE((sk.G.transpose() * bz).norm(), 1e-10 * sk.G.norm() * bz.norm());
    EXPECT_LE((ss.V_gamma.transpose() * bz).norm(), 1e-10 * ss.V_gamma.norm() * bz.norm());
  }
  EXPECT_TRUE(any_eta);
}

TEST(Preconditioner, ConstructorValidation)
{
  const auto& p = desk(1e3);
  const auto as2 = build_method(p, config(Variant::AS2));
  const auto soras = build_method(p, config(Variant::SORAS2));
  EXPECT_THROW(Preconditioner(Variant::AS2, p.d, {}, as2.cs), SizeMismatch);
  EXPECT_THROW(Preconditioner(Variant::AS2, p.d, soras.kernels, as2.cs), Error);
  EXPECT_THROW(Preconditioner(Variant::SORAS2_inexact, p.d, soras.kernels, soras.cs), Error);
  EXPECT_THROW(Preconditioner(Variant::AS2_inexact, p.d, as2.kernels, as2.cs), Error);
  EXPECT_THROW(as2.preconditioner(p.d).apply(Matrix(Matrix::Zero(3, 1))), SizeMismatch);
  EXPECT_EQ(parse_variant("SORAS2_inexact"), Variant::SORAS2_inexact);
  EXPECT_FALSE(parse_variant("RAS").has_value());
}

// Energy comparison of E and E~: (E~ u, u) <= lambda_max(E^{-1} E~) |Z u|_A^2 and |Z u|_A^2 <= lambda_max(E E~^{-1}) (E~ u, u)
TEST(InexactCoarse, EnergyComparison)
{
  const auto& p = desk(1e3);
  for (const char* name : {"jacobi", "block_jacobi:4", "scaled:2", "scaled:0.5"}) {
    auto mc = method(Variant::AS2_inexact, 0.5, name);
    mc.basis = CoarseBasis::selected;
    const auto s = build_method(p, mc);
    const auto& cs = s.cs;
    const auto& ic = *cs.inexact;
    for (std::uint64_t draw = 0; draw < 100; ++draw) {
      const Vector u = random_vector(cs.dim(), 400 + draw);
      const double et = u.dot(ic.E_tilde * u);
      const double zu = u.dot(cs.E * u);
      EXPECT_LE(et, zu / ic.lambda_minus * (1 + 1e-10)) << name;
      EXPECT_LE(zu, ic.lambda_plus * et * (1 + 1e-10)) << name;
    }
  }
}

TEST(Bounds, ExactFormulas)
{
  const auto as = as_bound(4, 3, 0.5);
  EXPECT_DOUBLE_EQ(as.lower, 1.0 / 2.5);
  EXPECT_DOUBLE_EQ(as.upper, 4.0);
  EXPECT_DOUBLE_EQ(as.kappa(), 10.0);
  EXPECT_DOUBLE_EQ(soras_bound(4, 3, 0.5, 0.1).upper, 1.0);
  EXPECT_DOUBLE_EQ(soras_bound(4, 3, 0.5, 2.0).upper, 8.0);
}

TEST(Bounds, InexactReducesToExact)
{
  for (int k0 : {1, 2, 4})
    for (int k1 : {1, 2, 3})
      for (double tau : {0.1, 0.5, 2.0}) {
        const auto e = as_bound(k0, k1, tau), i = inexact_as_bound(k0, k1, tau, 1.0, 1.0);
        EXPECT_NEAR(i.lower, e.lower, 1e-15);
        EXPECT_NEAR(i.upper, e.upper, 1e-14 * e.upper);
        for (double gamma : {0.1, 1.0, 3.0}) {
          const auto es = soras_bound(k0, k1, tau, gamma), is = inexact_soras_bound(k0, k1, tau, gamma, 1.0, 1.0);
          EXPECT_NEAR(is.lower, es.lower, 1e-15);
          EXPECT_NEAR(is.upper, es.upper, 1e-14 * es.upper);
        }
      }
}

TEST(Bounds, InexactUpperIsMinMaxOfYoungSplit)
{
  // c_R = min over delta of max(lambda+ (1 + delta), K (1 + eps^2) + K eps^2 / delta)
  for (double lm : {0.5, 0.9}) {
    for (double lp : {1.1, 1.7}) {
      const double eps = eps_from_lambdas(lm, lp), K = 6.0;
      const double closed = minmax_closed_form(lp, K * (1 + eps * eps), lp, K * eps * eps);
      EXPECT_NEAR(inexact_as_bound(6, 2, 0.5, lm, lp).upper, closed, 1e-14 * closed);
      EXPECT_NEAR(inexact_soras_bound(3, 2, 0.5, 2.0, lm, lp).upper, closed, 1e-14 * closed);
    }
  }
  // monotone in the surrogate quality
  EXPECT_LT(inexact_as_bound(4, 2, 0.5, 0.9, 1.1).lower, as_bound(4, 2, 0.5).lower);
  EXPECT_GT(inexact_as_bound(4, 2, 0.5, 0.9, 1.1).upper, as_bound(4, 2, 0.5).upper);
}

namespace {

/// min over delta in [lo, hi] of max(c + alpha delta, d + beta / delta): log grid, then zoom.
double grid_minmax(double c, double d, double alpha, double beta, double lo = 1e-6, double hi = 1e6)
{
  auto f = [&](double delta) { return std::max(c + alpha * delta, d + beta / delta); };
  double best = std::numeric_limits<double>::infinity(), arg = lo;
  double a = std::log(lo), b = std::log(hi);
  for (int round = 0; round < 12; ++round) {
    const int n = 2000;
    for (int k = 0; k <= n; ++k) {
      const double delta = std::exp(a + (b - a) * k / n);
      const double v = f(delta);
      if (v < best) best = v, arg = delta;
    }
    const double w = (b - a) / n * 2;
    a = std::max(std::log(lo), std::log(arg) - w);
    b = std::min(std::log(hi), std::log(arg) + w);
  }
  return best;
}

} // namespace

TEST(Bounds, MinMaxClosedFormMatchesGridSearch)
{
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> logu(std::log(0.05), std::log(20.0));
  for (int trial = 0; trial < 50; ++trial) {
    const double c = std::exp(logu(rng)), d = std::exp(logu(rng)), alpha = std::exp(logu(rng)), beta = std::exp(logu(rng));
    const double closed = minmax_closed_form(c, d, alpha, beta);
    EXPECT_NEAR(grid_minmax(c, d, alpha, beta), closed, 1e-6 * closed) << c << " " << d << " " << alpha << " " << beta;
  }
}

TEST(OneLevel, SorasNeumannWithoutKernelGivesUnitTau)
{
  // mass-dominated so that A^Neu is well conditioned
  ProblemConfig pc;
  pc.nx = pc.ny = 8;
  pc.pattern = CoefficientPattern::channels;
  pc.contrast = 1e3;
  pc.eps_ratio = 1e3;
  const auto p = build_problem(pc);
  KernelOptions ko;
  ko.solver = LocalSolver::neumann;
  ko.use_near_kernel = false;
  const auto c = one_level_constants(p.ms, p.d, build_kernels(p.ms, p.d, ko), true);
  EXPECT_NEAR(c.tau0, 1.0, 1e-10);
  EXPECT_GT(c.gamma0, 0.0);
}

TEST(OneLevel, SingleSubdomainAsTauAtMostOne)
{
  ProblemConfig pc;
  pc.nx = pc.ny = 6;
  pc.pattern = CoefficientPattern::channels;
  pc.contrast = 1e3;
  pc.px = pc.py = 1;
  const auto p = build_problem(pc);
  const auto kernels = build_kernels(p.ms, p.d, KernelOptions{});
  const auto c = one_level_constants(p.ms, p.d, kernels, false);
  EXPECT_LE(c.tau0, 1.0 + 1e-10);
  // dense Rayleigh quotient check: (I - xi)^T A (I - xi) <= A
  const Matrix A = p.ms.A.to_dense();
  const auto& sk = kernels[0];
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    const Vector u = random_vector(A.rows(), 30 + draw);
    const Vector w = sk.xi0.complement(Matrix(u)).col(0);
    EXPECT_LE(w.dot(A * w), u.dot(A * u) * (1 + 1e-10));
  }
}

TEST(OneLevel, HighContrastGivesLargeTau)
{
  const auto& p = cached_problem(16, 16, CoefficientPattern::channels, 1e6, 4, 2);
  const auto kernels = build_kernels(p.ms, p.d, KernelOptions{});
  const auto c = one_level_constants(p.ms, p.d, kernels, false);
  EXPECT_GT(c.tau0, 10.0);
  const auto s = build_method(p, method(Variant::AS1));
  EXPECT_DOUBLE_EQ(s.tau, c.tau0);
}

// sum_j (L_j (I - pi_j) R_j U, (I - pi_j) R_j U) <= k1 tau a(U, U)
TEST(StableDecomposition, FilteredLocalEnergies)
{
  const auto& p = desk(1e3);
  const double tau = 0.5;
  for (Variant v : {Variant::AS2, Variant::SORAS2}) {
    const auto s = build_method(p, method(v, tau));
    const GevpKind kind = is_soras(v) ? GevpKind::lower_soras : GevpKind::lower_as;
    std::vector<Matrix> L, V, Aneu;
    for (const auto& sk : s.kernels) {
      L.push_back(assemble_pencil(kind, p.ms, p.d, sk).left.values());
      Aneu.push_back(p.d.A_neu[sk.i].to_dense());
      const auto sel = select_above(s.lower[sk.i], tau);
      Matrix vv(sk.dim(), static_cast<Index>(sel.size()));
      for (std::size_t c = 0; c < sel.size(); ++c) vv.col(c) = s.lower[sk.i].vectors.col(sel[c]);
      V.push_back(vv);
    }
    for (std::uint64_t draw = 0; draw < 100; ++draw) {
      const Vector u = random_vector(p.d.global_dim, 600 + draw);
      double sum = 0.0;
      for (Index j = 0; j < p.d.N; ++j) {
        const Vector uj = p.d.restrict_to(j, u);
        const Vector w = uj - V[j] * (V[j].transpose() * (Aneu[j] * uj));
        sum += w.dot(L[j] * w);
      }
      EXPECT_LE(sum, p.d.k1 * tau * u.dot(p.ms.A.multiply(u)) * (1 + 1e-9)) << to_string(v);
    }
  }
}

// The AS and SORAS operators are onto: sum_i R_i^T D_i R_i = I reconstructs any U
TEST(StableDecomposition, PartitionOfUnitySplitting)
{
  const auto& p = desk(1e3);
  const Vector u = random_vector(p.d.global_dim, 5);
  Vector sum = Vector::Zero(p.d.global_dim);
  for (Index i = 0; i < p.d.N; ++i) sum += p.d.extend(i, Vector(p.d.D[i].cwiseProduct(p.d.restrict_to(i, u))));
  EXPECT_LE((sum - u).norm(), 1e-14 * u.norm());
}
