#pragma once

/** @file bounds.hpp
    @brief Spectral bounds c_T <= lambda(M^{-1} A) <= c_R for each variant.
*/

#include "geneo/coarse/gevp.hpp"
#include "geneo/core/dense.hpp"
#include "geneo/dd/decomposition.hpp"
#include "geneo/kernel/subdomain_kernel.hpp"
#include "geneo/model/model_system.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace geneo {

struct SpectralBound {
  double lower = 0.0;  ///< c_T
  double upper = 0.0;  ///< c_R
  double kappa() const { return upper / lower; }
};

/// min over delta > 0 of max(c + alpha delta, d + beta / delta), all parameters positive.
inline double minmax_closed_form(double c, double d, double alpha, double beta)
{
  return (d + c + std::sqrt((d - c) * (d - c) + 4.0 * alpha * beta)) / 2.0;
}

/// AS with coarse space built from threshold tau (tau0 for one level).
inline SpectralBound as_bound(int k0, int k1, double tau) { return {1.0 / (1.0 + k1 * tau), static_cast<double>(k0)}; }

/// SORAS with lower threshold tau and upper threshold gamma (tau0, gamma0 for one level).
inline SpectralBound soras_bound(int k0, int k1, double tau, double gamma) { return {1.0 / (1.0 + k1 * tau), std::max(1.0, k0 * gamma)}; }

inline double eps_from_lambdas(double lambda_minus, double lambda_plus) { return std::max(std::abs(1.0 - lambda_minus), std::abs(1.0 - lambda_plus)); }

namespace detail {

/// c_R with upper constant K (k0 for AS, k0 gamma for SORAS) and c_T with
/// coupling constant C (k0 k1 tau for AS, k0 k1 tau gamma for SORAS).
inline SpectralBound inexact_bound(double K, double C, int k1, double tau, double lambda_minus, double lambda_plus)
{
  const double eps = eps_from_lambdas(lambda_minus, lambda_plus);
  const double e2 = eps * eps;
  const double a = K * (1.0 + e2);
  SpectralBound b;
  b.upper = (a + lambda_plus + std::sqrt((a - lambda_plus) * (a - lambda_plus) + 4.0 * lambda_plus * K * e2)) / 2.0;
  const double s = 1.0 + eps * std::sqrt(C);
  b.lower = lambda_minus / (s * s + lambda_minus * k1 * tau);
  return b;
}

} // namespace detail

inline SpectralBound inexact_as_bound(int k0, int k1, double tau, double lambda_minus, double lambda_plus)
{
  return detail::inexact_bound(k0, static_cast<double>(k0) * k1 * tau, k1, tau, lambda_minus, lambda_plus);
}

inline SpectralBound inexact_soras_bound(int k0, int k1, double tau, double gamma, double lambda_minus, double lambda_plus)
{
  return detail::inexact_bound(k0 * gamma, static_cast<double>(k0) * k1 * tau * gamma, k1, tau, lambda_minus, lambda_plus);
}

struct OneLevelConstants {
  double tau0 = 0.0;
  double gamma0 = 0.0;  ///< SORAS only
};

/** @brief tau0 (largest lower-problem eigenvalue) and, for SORAS, gamma0
    (largest upper-problem eigenvalue) over all subdomains. AS uses the
    Dirichlet kernels, SORAS the kernels of its local solver.
*/
inline OneLevelConstants one_level_constants(const ModelSystem& ms, const Decomposition& d, const std::vector<SubdomainKernel>& kernels, bool soras)
{
  OneLevelConstants c;
  c.tau0 = max_eigenvalue(solve_all(soras ? GevpKind::lower_soras : GevpKind::lower_as, ms, d, kernels, 1.0));
  if (soras) c.gamma0 = max_eigenvalue(solve_all(GevpKind::upper_soras, ms, d, kernels, 1.0));
  return c;
}

} // namespace geneo
