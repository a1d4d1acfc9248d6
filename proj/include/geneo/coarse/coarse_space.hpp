#pragma once

/** @file coarse_space.hpp
    @brief Coarse basis Z, coarse operator E = Z^T A Z and an optional surrogate E~.

    Candidates are taken in a fixed order: the weighted near-kernel columns
    R_i^T D_i G_i (i ascending), then the lower-problem vectors
    R_j^T D_j (I - xi0_j) V_jk for lambda_jk > tau (j ascending, lambda
    descending), then the upper-problem vectors R_i^T D_i U_ik for mu_ik > gamma.
    They are compressed by Gram-Schmidt, first in l2 to drop dependent columns
    and then in the A inner product.
*/

#include "geneo/coarse/gevp.hpp"
#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"
#include "geneo/core/sparse.hpp"
#include "geneo/dd/decomposition.hpp"
#include "geneo/kernel/subdomain_kernel.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace geneo {

enum class CoarseBasis {
  orthonormal,  ///< A-orthonormal output of the Gram-Schmidt pass
  selected,     ///< the kept candidate columns themselves, scaled to unit A-norm
};

enum class ColumnSource { near_kernel, geneo_tau, geneo_gamma };

inline std::string to_string(ColumnSource s)
{
  switch (s) {
  case ColumnSource::near_kernel: return "VG";
  case ColumnSource::geneo_tau: return "geneo_tau";
  case ColumnSource::geneo_gamma: return "geneo_gamma";
  }
  return "unknown";
}

struct ColumnTag {
  ColumnSource source = ColumnSource::near_kernel;
  Index subdomain = 0;
  Index k = 0;             ///< column of G_i, or eigenpair index
  double eigenvalue = 0.0; ///< 0 for near-kernel columns
};

struct CoarseOptions {
  double tau = 0.5;
  double gamma = 2.0;
  bool use_lower = true;   ///< include lambda > tau vectors
  bool use_upper = false;  ///< include mu > gamma vectors
  CoarseBasis basis = CoarseBasis::orthonormal;
  double rank_tol = 1e-10;
};

enum class InexactKind { exact, jacobi, block_jacobi, scaled, truncated_cholesky };

struct InexactStrategy {
  InexactKind kind = InexactKind::exact;
  Index block = 4;
  double alpha = 2.0;
  double drop_tol = 1e-2;

  std::string name() const
  {
    std::ostringstream s;
    switch (kind) {
    case InexactKind::exact: s << "exact"; break;
    case InexactKind::jacobi: s << "jacobi"; break;
    case InexactKind::block_jacobi: s << "block_jacobi:" << block; break;
    case InexactKind::scaled: s << "scaled:" << alpha; break;
    case InexactKind::truncated_cholesky: s << "truncated_cholesky:" << drop_tol; break;
    }
    return s.str();
  }
};

/// Parse "exact", "jacobi", "block_jacobi[:b]", "scaled[:alpha]", "truncated_cholesky[:drop]".
inline InexactStrategy parse_inexact(const std::string& text)
{
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  InexactStrategy s;
  auto number = [&](double fallback) {
    if (arg.empty()) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      throw ParseError("inexact strategy '" + text + "': bad parameter");
    }
    if (used != arg.size()) throw ParseError("inexact strategy '" + text + "': bad parameter");
    return v;
  };
  if (head == "exact" || head == "jacobi") {
    if (colon != std::string::npos) throw ParseError("inexact strategy '" + text + "' takes no parameter");
    s.kind = head == "exact" ? InexactKind::exact : InexactKind::jacobi;
  } else if (head == "block_jacobi") {
    s.kind = InexactKind::block_jacobi;
    s.block = static_cast<Index>(number(4));
    if (s.block < 1) throw ParseError("inexact strategy '" + text + "': block size must be >= 1");
  } else if (head == "scaled") {
    s.kind = InexactKind::scaled;
    s.alpha = number(2.0);
    if (!(s.alpha > 0.0)) throw ParseError("inexact strategy '" + text + "': alpha must be > 0");
  } else if (head == "truncated_cholesky") {
    s.kind = InexactKind::truncated_cholesky;
    s.drop_tol = number(1e-2);
    if (!(s.drop_tol >= 0.0)) throw ParseError("inexact strategy '" + text + "': drop tolerance must be >= 0");
  } else
    throw ParseError("unknown inexact strategy '" + text + "'");
  return s;
}

struct InexactCoarse {
  InexactStrategy strategy;
  DenseSymMatrix E_tilde;
  Cholesky chol;
  double lambda_minus = 1.0;  ///< lambda_min(E E~^{-1})
  double lambda_plus = 1.0;   ///< lambda_max(E E~^{-1})
  double eps_A = 0.0;         ///< max(|1 - lambda_minus|, |1 - lambda_plus|)
};

namespace detail {

/// Left-looking Cholesky dropping |l_ij| < drop * l_jj. Returns L~ with E~ = L~ L~^T.
inline Matrix truncated_cholesky_factor(const Matrix& E, double drop)
{
  const Index n = E.rows();
  Matrix L = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = E(j, j) - L.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0)) throw NotPositiveDefinite("truncated_cholesky: pivot " + std::to_string(j) + " is not positive (" + std::to_string(pivot) + ")");
    const double ljj = std::sqrt(pivot);
    L(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      const double lij = (E(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / ljj;
      if (std::abs(lij) >= drop * ljj) L(i, j) = lij;
    }
  }
  return L;
}

} // namespace detail

/// Build E~ from E and the extreme eigenvalues of E E~^{-1}.
inline InexactCoarse make_inexact(const DenseSymMatrix& E, const InexactStrategy& strategy)
{
  const Index n = E.dim();
  InexactCoarse ic;
  ic.strategy = strategy;
  Matrix et = Matrix::Zero(n, n);
  switch (strategy.kind) {
  case InexactKind::exact: et = E.values(); break;
  case InexactKind::jacobi: et.diagonal() = E.values().diagonal(); break;
  case InexactKind::block_jacobi:
    for (Index s = 0; s < n; s += strategy.block) {
      const Index b = std::min(strategy.block, n - s);
      et.block(s, s, b, b) = E.values().block(s, s, b, b);
    }
    break;
  case InexactKind::scaled: et = strategy.alpha * E.values(); break;
  case InexactKind::truncated_cholesky: {
    const Matrix L = detail::truncated_cholesky_factor(E.values(), strategy.drop_tol);
    et = L * L.transpose();
    break;
  }
  }
  ic.E_tilde = DenseSymMatrix(et);
  ic.chol = Cholesky(ic.E_tilde, "E~ (" + strategy.name() + ")");
  if (n > 0) {
    const EigenPairs ep = sym_gevp(E, ic.E_tilde);
    ic.lambda_minus = ep.values[0];
    ic.lambda_plus = ep.values[n - 1];
  }
  ic.eps_A = std::max(std::abs(1.0 - ic.lambda_minus), std::abs(1.0 - ic.lambda_plus));
  return ic;
}

class CoarseSpace {
public:
  Matrix Z;
  Matrix AZ;
  DenseSymMatrix E;
  Cholesky E_chol;
  std::vector<ColumnTag> tags;
  Index candidate_count = 0;
  std::vector<Index> selected_tau;    ///< per subdomain
  std::vector<Index> selected_gamma;  ///< per subdomain
  std::optional<InexactCoarse> inexact;

  Index dim() const { return Z.cols(); }
  Index global_dim() const { return Z.rows(); }
  bool has_inexact() const { return inexact.has_value(); }

  void set_inexact(const InexactStrategy& s) { inexact = make_inexact(E, s); }

  const Cholesky& solver(bool use_inexact) const
  {
    if (use_inexact) {
      if (!inexact) throw Error("CoarseSpace: no inexact surrogate configured");
      return inexact->chol;
    }
    return E_chol;
  }

  /// Z E^{-1} Z^T x, which equals P0 A^{-1} x (E~ when @p use_inexact).
  Matrix coarse_solve(const Matrix& x, bool use_inexact = false) const
  {
    if (dim() == 0) return Matrix::Zero(x.rows(), x.cols());
    return Z * solver(use_inexact).solve(Z.transpose() * x);
  }
  /// P0 x = Z E^{-1} (A Z)^T x
  Matrix P0(const Matrix& x, bool use_inexact = false) const
  {
    if (dim() == 0) return Matrix::Zero(x.rows(), x.cols());
    return Z * solver(use_inexact).solve(AZ.transpose() * x);
  }
  /// P0^T x = A Z E^{-1} Z^T x
  Matrix P0t(const Matrix& x, bool use_inexact = false) const
  {
    if (dim() == 0) return Matrix::Zero(x.rows(), x.cols());
    return AZ * solver(use_inexact).solve(Z.transpose() * x);
  }
};

/// Candidate columns and their tags, in deterministic order.
struct CoarseCandidates {
  Matrix columns;
  std::vector<ColumnTag> tags;
  std::vector<Index> selected_tau;
  std::vector<Index> selected_gamma;
};

inline CoarseCandidates collect_candidates(const Decomposition& d, const std::vector<SubdomainKernel>& kernels, const std::vector<EigenPairs>& lower,
                                           const std::vector<EigenPairs>& upper, const CoarseOptions& opt)
{
  if (static_cast<Index>(kernels.size()) != d.N) throw SizeMismatch("collect_candidates: kernel count does not match subdomain count");
  if (opt.use_lower && static_cast<Index>(lower.size()) != d.N) throw SizeMismatch("collect_candidates: lower eigenpairs missing");
  if (opt.use_upper && static_cast<Index>(upper.size()) != d.N) throw SizeMismatch("collect_candidates: upper eigenpairs missing");

  std::vector<Matrix> blocks;
  CoarseCandidates c;
  c.selected_tau.assign(d.N, 0);
  c.selected_gamma.assign(d.N, 0);
  Index total = 0;
  auto push = [&](Index i, const Matrix& local) {
    blocks.push_back(d.extend(i, d.D[i].asDiagonal() * local));
    total += local.cols();
  };

  for (Index i = 0; i < d.N; ++i) {
    push(i, kernels[i].G);
    for (Index k = 0; k < kernels[i].G.cols(); ++k) c.tags.push_back({ColumnSource::near_kernel, i, k, 0.0});
  }
  if (opt.use_lower)
    for (Index j = 0; j < d.N; ++j) {
      const auto sel = select_above(lower[j], opt.tau);
      Matrix v(kernels[j].dim(), static_cast<Index>(sel.size()));
      for (std::size_t c2 = 0; c2 < sel.size(); ++c2) v.col(c2) = lower[j].vectors.col(sel[c2]);
      push(j, kernels[j].xi0.complement(v));
      for (Index k : sel) c.tags.push_back({ColumnSource::geneo_tau, j, k, lower[j].values[k]});
      c.selected_tau[j] = static_cast<Index>(sel.size());
    }
  if (opt.use_upper)
    for (Index i = 0; i < d.N; ++i) {
      const auto sel = select_above(upper[i], opt.gamma);
      Matrix u(kernels[i].dim(), static_cast<Index>(sel.size()));
      for (std::size_t c2 = 0; c2 < sel.size(); ++c2) u.col(c2) = upper[i].vectors.col(sel[c2]);
      push(i, u);
      for (Index k : sel) c.tags.push_back({ColumnSource::geneo_gamma, i, k, upper[i].values[k]});
      c.selected_gamma[i] = static_cast<Index>(sel.size());
    }

  c.columns.resize(d.global_dim, total);
  Index at = 0;
  for (const auto& b : blocks) {
    c.columns.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return c;
}

inline CoarseSpace assemble_coarse(const SparseSymMatrix& A, const Decomposition& d, const std::vector<SubdomainKernel>& kernels, const std::vector<EigenPairs>& lower,
                                   const std::vector<EigenPairs>& upper, const CoarseOptions& opt)
{
  auto cand = collect_candidates(d, kernels, lower, upper, opt);
  if (cand.columns.cols() == 0) throw EmptyCoarseSpace("assemble_coarse: no candidate columns (empty near-kernel and nothing above the thresholds)");
  CoarseSpace cs;
  cs.candidate_count = cand.columns.cols();
  cs.selected_tau = cand.selected_tau;
  cs.selected_gamma = cand.selected_gamma;
  // Linear dependencies are detected in l2 first: in the A inner product the
  // near-kernel columns sit at the bottom of a spectrum spread over ~1/eps, and
  // rounding hides exact dependencies there.
  const auto l2 = rank_reveal(cand.columns, euclidean_inner_product(), opt.rank_tol);
  std::vector<Index> kept;
  Matrix independent(d.global_dim, static_cast<Index>(l2.kept.size()));
  for (std::size_t c = 0; c < l2.kept.size(); ++c) independent.col(c) = cand.columns.col(l2.kept[c]);
  const auto rr = rank_reveal(independent, [&A](const Matrix& v) { return A.multiply(v); }, opt.rank_tol);
  for (Index k : rr.kept) kept.push_back(l2.kept[k]);
  for (Index k : kept) cs.tags.push_back(cand.tags[k]);
  if (opt.basis == CoarseBasis::orthonormal) {
    cs.Z = rr.basis;
  } else {
    cs.Z.resize(d.global_dim, static_cast<Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) cs.Z.col(c) = cand.columns.col(kept[c]);
    const Matrix AZ0 = A.multiply(cs.Z);
    for (Index c = 0; c < cs.Z.cols(); ++c) cs.Z.col(c) /= std::sqrt(cs.Z.col(c).dot(AZ0.col(c)));
  }
  cs.AZ = A.multiply(cs.Z);
  const Matrix e = cs.Z.transpose() * cs.AZ;
  cs.E = DenseSymMatrix(Matrix(0.5 * (e + e.transpose())));
  cs.E_chol = Cholesky(cs.E, "coarse operator E");
  return cs;
}

} // namespace geneo
