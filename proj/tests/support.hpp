#pragma once

#include "geneo/solver/setup.hpp"
#include "geneo/solver/verify.hpp"

#include <map>
#include <memory>
#include <random>
#include <tuple>

namespace geneo::testing {

/// Random SPD matrix L L^T + n I with a fixed seed.
inline Matrix random_spd(Index n, std::uint64_t seed)
{
  const Matrix l = random_matrix(n, n, seed);
  return l * l.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

inline double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

/// Problems are expensive enough to share across tests of one binary.
inline const Problem& cached_problem(Index nx, Index ny, CoefficientPattern pat, double rho, Index px, Index py, Index overlap = 1)
{
  using Key = std::tuple<Index, Index, int, double, Index, Index, Index>;
  static std::map<Key, std::unique_ptr<Problem>> cache;
  const Key k{nx, ny, static_cast<int>(pat), rho, px, py, overlap};
  auto& slot = cache[k];
  if (!slot) {
    ProblemConfig pc;
    pc.nx = nx;
    pc.ny = ny;
    pc.pattern = pat;
    pc.contrast = rho;
    pc.px = px;
    pc.py = py;
    pc.overlap = overlap;
    slot = std::make_unique<Problem>(build_problem(pc));
  }
  return *slot;
}

/// The 8x8 channels desk problem with 2x2 subdomains.
inline const Problem& desk(double rho = 1e3) { return cached_problem(8, 8, CoefficientPattern::channels, rho, 2, 2); }

inline MethodConfig method(Variant v, double tau = 1.0, const std::string& inexact = "exact")
{
  MethodConfig mc;
  mc.variant = v;
  mc.tau = tau;
  mc.inexact = parse_inexact(inexact);
  return mc;
}

} // namespace geneo::testing
