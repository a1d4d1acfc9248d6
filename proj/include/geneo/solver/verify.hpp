#pragma once

/** @file verify.hpp
    @brief Dense spectral checks of a preconditioned operator against its bound.

    The eigenvalues of M^{-1} A are those of L^T M^{-1} L with A = L L^T, which
    is symmetric because M^{-1} is; this is the (A M^{-1} A, A) pencil reduced
    by the Cholesky factor of A.
*/

#include "geneo/core/dense.hpp"
#include "geneo/precond/bounds.hpp"
#include "geneo/precond/preconditioner.hpp"
#include "geneo/solver/pcg.hpp"
#include "geneo/solver/setup.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <random>
#include <string>

namespace geneo {

inline Matrix dense_operator(const Preconditioner& M) { return M.apply(Matrix(Matrix::Identity(M.dim(), M.dim()))); }

/// Ascending eigenvalues of M^{-1} A.
inline Vector preconditioned_spectrum(const SparseSymMatrix& A, const Preconditioner& M)
{
  const Cholesky chol(A.to_dense(), "A");
  const Matrix L = chol.lower();
  const Matrix C = L.transpose() * M.apply(L);
  return sym_eigenvalues(C);
}

struct BoundReport {
  std::string method;
  double tau = 0.0;
  double gamma = 0.0;
  int k0 = 0;
  int k1 = 0;
  std::optional<double> tau0, gamma0;
  std::optional<double> lambda_minus, lambda_plus, eps_A;
  Index coarse_dim = 0;
  double lambda_min = 0.0;  ///< of M^{-1} A
  double lambda_max = 0.0;
  double c_T = 0.0;
  double c_R = 0.0;
  double kappa_exact = 0.0;
  double kappa_bound = 0.0;
  bool satisfied = false;       ///< kappa_exact <= kappa_bound (1 + 1e-8)
  bool within_interval = false; ///< c_T (1 - 1e-8) <= lambda <= c_R (1 + 1e-8)
  double margin = 0.0;          ///< kappa_bound / kappa_exact
};

inline constexpr double kBoundSlack = 1e-8;

inline BoundReport make_report(const Problem& p, const MethodSetup& s, const Vector& spectrum)
{
  BoundReport r;
  r.method = to_string(s.config.variant);
  r.tau = s.tau;
  r.gamma = is_soras(s.config.variant) ? s.gamma : 0.0;
  r.k0 = p.d.k0;
  r.k1 = p.d.k1;
  if (is_one_level(s.config.variant)) {
    r.tau0 = s.one_level.tau0;
    if (is_soras(s.config.variant)) r.gamma0 = s.one_level.gamma0;
  }
  if (s.cs.has_inexact()) {
    r.lambda_minus = s.cs.inexact->lambda_minus;
    r.lambda_plus = s.cs.inexact->lambda_plus;
    r.eps_A = s.cs.inexact->eps_A;
  }
  r.coarse_dim = s.cs.dim();
  r.lambda_min = spectrum[0];
  r.lambda_max = spectrum[spectrum.size() - 1];
  const SpectralBound b = method_bound(p, s);
  r.c_T = b.lower;
  r.c_R = b.upper;
  r.kappa_exact = r.lambda_max / r.lambda_min;
  r.kappa_bound = b.kappa();
  r.satisfied = r.lambda_min > 0.0 && r.kappa_exact <= r.kappa_bound * (1.0 + kBoundSlack);
  r.within_interval = r.lambda_min >= r.c_T * (1.0 - kBoundSlack) && r.lambda_max <= r.c_R * (1.0 + kBoundSlack);
  r.margin = r.kappa_bound / r.kappa_exact;
  return r;
}

inline BoundReport verify_bounds(const Problem& p, const MethodSetup& s)
{
  const Preconditioner M = s.preconditioner(p.d);
  return make_report(p, s, preconditioned_spectrum(p.ms.A, M));
}

/// ||P0 - P0~||_A from explicitly assembled projections: ||L^T (P0 - P0~) L^{-T}||_2.
inline double eps_A_dense(const SparseSymMatrix& A, const CoarseSpace& cs)
{
  const Index n = cs.global_dim();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix diff = cs.P0(I, false) - cs.P0(I, true);
  const Matrix L = Cholesky(A.to_dense(), "A").lower();
  const Matrix left = L.transpose() * diff;
  // X = left * L^{-T}  <=>  X L^T = left
  const Matrix X = L.triangularView<Eigen::Lower>().solve(left.transpose()).transpose();
  Eigen::JacobiSVD<Matrix> svd(X);
  return svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
}

inline PcgResult solve(const Problem& p, const Preconditioner& M, const Vector& b, const PcgOptions& opt = {})
{
  const auto& A = p.ms.A;
  return pcg([&A](const Vector& x) { return A.multiply(x); }, [&M](const Vector& x) { return M.apply(x); }, b, opt);
}

/// Deterministic right-hand side with standard normal entries.
inline Vector random_vector(Index n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Index k = 0; k < n; ++k) v[k] = g(rng);
  return v;
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = g(rng);
  return m;
}

} // namespace geneo
