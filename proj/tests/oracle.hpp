#pragma once

#include "geneo/solver/setup.hpp"
#include "geneo/solver/verify.hpp"

#include <limits>
#include <vector>

namespace geneo::testing::oracle {

inline const std::vector<Variant> kAllVariants{Variant::AS1, Variant::SORAS1, Variant::AS2, Variant::SORAS2, Variant::AS2_inexact, Variant::SORAS2_inexact};

inline Matrix selection(const Decomposition& d, Index i)
{
  Matrix r = Matrix::Zero(d.local_dim(i), d.global_dim);
  for (Index k = 0; k < d.local_dim(i); ++k) r(k, d.dof_sets[i][k]) = 1.0;
  return r;
}

/// M^{-1} from explicit dense factors of the defining formula.
inline Matrix dense_preconditioner(const Problem& p, const MethodSetup& s)
{
  const Variant v = s.config.variant;
  const Index n = p.d.global_dim;
  const Matrix A = p.ms.A.to_dense();
  const Matrix& Z = s.cs.Z;
  const Matrix E = Z.transpose() * A * Z;
  const Matrix Einv = is_inexact(v) ? Matrix(s.cs.inexact->E_tilde.values().inverse()) : Matrix(E.inverse());
  const Matrix P0 = Z * Einv * Z.transpose() * A;
  Matrix local = Matrix::Zero(n, n);
  for (Index i = 0; i < p.d.N; ++i) {
    const Matrix R = selection(p.d, i);
    const Matrix Ai = R * A * R.transpose();
    const Matrix D = p.d.D[i].asDiagonal();
    Matrix Li;
    if (!is_soras(v)) {
      Li = Ai.inverse();
    } else {
      const Matrix B = s.config.soras_solver == LocalSolver::dirichlet ? Ai : p.d.A_neu[i].to_dense();
      if (v == Variant::SORAS2_inexact) {
        // (I - eta)(I - xi0) B^{-1} = W (W^T B W)^{-1} W^T with W spanning the mu <= gamma eigenvectors
        const auto& up = s.upper[i];
        std::vector<Index> keep;
        for (Index k = 0; k < up.size(); ++k)
          if (!exceeds_threshold(up.values[k], s.gamma)) keep.push_back(k);
        Matrix W(B.rows(), static_cast<Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c) W.col(c) = up.vectors.col(keep[c]);
        Li = D * W * (W.transpose() * B * W).inverse() * W.transpose() * D;
      } else {
        Li = D * B.inverse() * D;
      }
    }
    local += R.transpose() * Li * R;
  }
  const Matrix I = Matrix::Identity(n, n);
  return Z * Einv * Z.transpose() + (I - P0) * local * (I - P0).transpose();
}

/// Rounding unit with a safety factor for accumulated dense kernels.
constexpr double kRound = 64 * std::numeric_limits<double>::epsilon();

inline double condition(const Matrix& spd)
{
  const Vector ev = sym_eigenvalues(spd);
  return ev[ev.size() - 1] / ev[0];
}

/// The desk problem with a heavier mass term: cond(A) ~ 6e5 instead of ~ 6e9.
inline const Problem& mild_desk()
{
  static const Problem p = [] {
    ProblemConfig pc;
    pc.nx = pc.ny = 8;
    pc.pattern = CoefficientPattern::channels;
    pc.contrast = 1e3;
    pc.eps_ratio = 1e-2;
    return build_problem(pc);
  }();
  return p;
}

} // namespace geneo::testing::oracle
