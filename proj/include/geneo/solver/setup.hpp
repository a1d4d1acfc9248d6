#pragma once

/** @file setup.hpp
    @brief End-to-end construction of a model problem and one preconditioner.
*/

#include "geneo/coarse/coarse_space.hpp"
#include "geneo/coarse/gevp.hpp"
#include "geneo/dd/decomposition.hpp"
#include "geneo/kernel/subdomain_kernel.hpp"
#include "geneo/model/coefficients.hpp"
#include "geneo/model/grid_complex.hpp"
#include "geneo/model/model_system.hpp"
#include "geneo/precond/bounds.hpp"
#include "geneo/precond/preconditioner.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace geneo {

struct ProblemConfig {
  Index nx = 8;
  Index ny = 8;
  CoefficientPattern pattern = CoefficientPattern::constant;
  double contrast = 1.0;
  std::uint64_t seed = 0;
  double eps_ratio = 1e-6;
  Index px = 2;
  Index py = 2;
  Index overlap = 1;
};

struct MethodConfig {
  Variant variant = Variant::AS2;
  LocalSolver soras_solver = LocalSolver::neumann;
  double tau = 0.5;
  std::optional<double> gamma;  ///< default 2 k0
  InexactStrategy inexact;
  CoarseBasis basis = CoarseBasis::orthonormal;
  bool use_near_kernel = true;
};

/// A problem instance with its decomposition.
struct Problem {
  ProblemConfig config;
  GridComplex gc;
  CoefficientField cf;
  ModelSystem ms;
  Decomposition d;
};

inline Problem build_problem(const ProblemConfig& pc)
{
  Problem p;
  p.config = pc;
  p.gc = build_grid_complex(pc.nx, pc.ny);
  p.cf = make_coefficients(p.gc, pc.pattern, pc.contrast, pc.seed, pc.eps_ratio);
  p.ms = assemble_system(p.gc, p.cf);
  if (p.ms.dim() == 0) throw SizeMismatch("build_problem: the grid has no interior edges");
  p.d = decompose(p.ms, p.gc, pc.px, pc.py, pc.overlap);
  return p;
}

/** @brief Kernels, eigenproblems, coarse space and constants for one variant.

    Obtain the operator through preconditioner() after the object has reached
    its final location; the operator refers to the members.
*/
struct MethodSetup {
  MethodConfig config;
  double tau = 0.0;    ///< threshold actually used (tau0 for one-level methods)
  double gamma = 0.0;  ///< threshold actually used (gamma0 for one-level SORAS)
  std::vector<SubdomainKernel> kernels;
  std::vector<EigenPairs> lower;
  std::vector<EigenPairs> upper;
  std::vector<SorasSubspaces> soras;
  CoarseSpace cs;
  OneLevelConstants one_level;

  Preconditioner preconditioner(const Decomposition& d, SorasLocalForm form = SorasLocalForm::simplified) const
  {
    return Preconditioner(config.variant, d, kernels, cs, soras.empty() ? nullptr : &soras, form);
  }
};

inline MethodSetup build_method(const Problem& p, const MethodConfig& mc)
{
  const bool soras = is_soras(mc.variant);
  MethodSetup s;
  s.config = mc;
  KernelOptions ko;
  ko.solver = soras ? mc.soras_solver : LocalSolver::dirichlet;
  ko.use_near_kernel = mc.use_near_kernel;
  s.kernels = build_kernels(p.ms, p.d, ko);

  const GevpKind lower_kind = soras ? GevpKind::lower_soras : GevpKind::lower_as;
  s.lower = solve_all(lower_kind, p.ms, p.d, s.kernels, 1.0);
  if (soras) s.upper = solve_all(GevpKind::upper_soras, p.ms, p.d, s.kernels, 1.0);
  s.one_level.tau0 = max_eigenvalue(s.lower);
  if (soras) s.one_level.gamma0 = max_eigenvalue(s.upper);

  CoarseOptions co;
  co.basis = mc.basis;
  if (is_one_level(mc.variant)) {
    co.use_lower = false;
    co.use_upper = false;
    s.tau = s.one_level.tau0;
    s.gamma = s.one_level.gamma0;
  } else {
    if (!(mc.tau > 0.0)) throw ConfigError("tau must be > 0");
    co.tau = s.tau = mc.tau;
    co.use_lower = true;
    co.use_upper = soras;
    s.gamma = mc.gamma.value_or(2.0 * p.d.k0);
    if (soras && !(s.gamma > 0.0)) throw ConfigError("gamma must be > 0");
    co.gamma = s.gamma;
  }
  s.cs = assemble_coarse(p.ms.A, p.d, s.kernels, s.lower, s.upper, co);
  if (is_inexact(mc.variant)) s.cs.set_inexact(mc.inexact);
  if (mc.variant == Variant::SORAS2_inexact)
    for (Index i = 0; i < p.d.N; ++i) s.soras.push_back(build_soras_subspaces(s.kernels[i], s.upper[i], s.gamma));
  return s;
}

/// Spectral bound of the configured variant.
inline SpectralBound method_bound(const Problem& p, const MethodSetup& s)
{
  const int k0 = p.d.k0, k1 = p.d.k1;
  const Variant v = s.config.variant;
  switch (v) {
  case Variant::AS1:
  case Variant::AS2: return as_bound(k0, k1, s.tau);
  case Variant::SORAS1:
  case Variant::SORAS2: return soras_bound(k0, k1, s.tau, s.gamma);
  case Variant::AS2_inexact: return inexact_as_bound(k0, k1, s.tau, s.cs.inexact->lambda_minus, s.cs.inexact->lambda_plus);
  case Variant::SORAS2_inexact: return inexact_soras_bound(k0, k1, s.tau, s.gamma, s.cs.inexact->lambda_minus, s.cs.inexact->lambda_plus);
  }
  return {};
}

} // namespace geneo
