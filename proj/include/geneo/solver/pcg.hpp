#pragma once

/** @file pcg.hpp
    @brief Preconditioned conjugate gradients with Ritz values from the Lanczos tridiagonal.
*/

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace geneo {

using LinearOperator = std::function<Vector(const Vector&)>;

struct PcgOptions {
  double rtol = 1e-8;
  int maxit = 500;
  bool throw_on_failure = false;
};

struct PcgResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  ///< recursive residual norms / ||b||, entry 0 is the initial residual
  double true_residual = 0.0;            ///< ||b - A x|| / ||b|| of the returned iterate
  double ritz_min = 0.0;
  double ritz_max = 0.0;
  double kappa_estimate = 0.0;
  std::vector<double> ritz_values;
};

/// Thrown on an exhausted iteration budget when requested; carries the best iterate.
class PcgFailure : public MaxIterations {
public:
  PcgFailure(const std::string& what, PcgResult r) : MaxIterations(what), result(std::move(r)) {}
  PcgResult result;
};

/// Eigenvalues of the CG Lanczos tridiagonal after @p k steps.
inline std::vector<double> lanczos_ritz_values(const std::vector<double>& alpha, const std::vector<double>& beta)
{
  const Index k = static_cast<Index>(alpha.size());
  if (k == 0) return {};
  Matrix T = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) {
    T(j, j) = 1.0 / alpha[j] + (j > 0 ? beta[j - 1] / alpha[j - 1] : 0.0);
    if (j + 1 < k) {
      T(j, j + 1) = std::sqrt(beta[j]) / alpha[j];
      T(j + 1, j) = T(j, j + 1);
    }
  }
  const Vector ev = sym_eigenvalues(T);
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

inline PcgResult pcg(const LinearOperator& A, const LinearOperator& M_inv, const Vector& b, const PcgOptions& opt = {})
{
  if (!(opt.rtol > 0.0 && opt.rtol < 1.0)) throw Error("pcg: rtol must lie in (0,1)");
  PcgResult res;
  const Index n = b.size();
  res.x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    res.residual_history = {0.0};
    return res;
  }
  Vector r = b;
  Vector z = M_inv(r);
  Vector p = z;
  double rz = r.dot(z);
  res.residual_history.push_back(1.0);
  std::vector<double> alphas, betas;
  Vector best_x = res.x;
  double best = 1.0;
  for (int it = 1; it <= opt.maxit; ++it) {
    const Vector Ap = A(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rz / pAp;
    res.x += alpha * p;
    r -= alpha * Ap;
    alphas.push_back(alpha);
    const double rel = r.norm() / bnorm;
    res.residual_history.push_back(rel);
    res.iterations = it;
    if (rel < best) {
      best = rel;
      best_x = res.x;
    }
    if (rel <= opt.rtol) {
      res.converged = true;
      break;
    }
    z = M_inv(r);
    const double rz_new = r.dot(z);
    const double beta = rz_new / rz;
    betas.push_back(beta);
    rz = rz_new;
    p = z + beta * p;
  }
  if (!res.converged) res.x = best_x;
  res.true_residual = (b - A(res.x)).norm() / bnorm;
  res.ritz_values = lanczos_ritz_values(alphas, betas);
  if (!res.ritz_values.empty()) {
    res.ritz_min = res.ritz_values.front();
    res.ritz_max = res.ritz_values.back();
    res.kappa_estimate = res.ritz_max / res.ritz_min;
  }
  if (!res.converged && opt.throw_on_failure)
    throw PcgFailure("pcg: no convergence to " + std::to_string(opt.rtol) + " within " + std::to_string(opt.maxit) + " iterations (best " + std::to_string(best) + ")",
                     res);
  return res;
}

} // namespace geneo
