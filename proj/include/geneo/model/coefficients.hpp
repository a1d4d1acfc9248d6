#pragma once

#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"
#include "geneo/model/grid_complex.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace geneo {

enum class CoefficientPattern { constant, channels, checkerboard, random_contrast };

inline std::string to_string(CoefficientPattern p)
{
  switch (p) {
  case CoefficientPattern::constant: return "constant";
  case CoefficientPattern::channels: return "channels";
  case CoefficientPattern::checkerboard: return "checkerboard";
  case CoefficientPattern::random_contrast: return "random-contrast";
  }
  return "unknown";
}

inline std::optional<CoefficientPattern> parse_pattern(const std::string& s)
{
  if (s == "constant") return CoefficientPattern::constant;
  if (s == "channels") return CoefficientPattern::channels;
  if (s == "checkerboard") return CoefficientPattern::checkerboard;
  if (s == "random-contrast" || s == "random") return CoefficientPattern::random_contrast;
  return std::nullopt;
}

/// Per-face curl-curl coefficient nu and per-edge mass coefficient eps.
/// nu takes values in [1, contrast]; eps is eps_ratio * min(nu) on every edge.
struct CoefficientField {
  Vector nu;
  Vector eps;
  CoefficientPattern pattern = CoefficientPattern::constant;
  double contrast = 1.0;
  std::uint64_t seed = 0;
  double eps_ratio = 1e-6;
};

/** @brief Build a coefficient field for @p gc.

    - constant: nu = 1.
    - channels: horizontal strips of width one, nu = contrast on face rows
      j with j mod 4 == 1; they cross every vertical subdomain interface.
    - checkerboard: 2x2 face blocks alternate between 1 and contrast.
    - random-contrast: log-uniform nu = contrast^u, u ~ U(0,1), mt19937_64(seed).
*/
inline CoefficientField make_coefficients(const GridComplex& gc, CoefficientPattern pattern, double contrast = 1.0, std::uint64_t seed = 0,
                                          double eps_ratio = 1e-6)
{
  if (!(contrast >= 1.0)) throw Error("make_coefficients: contrast must be >= 1");
  if (!(eps_ratio > 0.0)) throw Error("make_coefficients: eps_ratio must be > 0");
  CoefficientField cf;
  cf.pattern = pattern;
  cf.contrast = contrast;
  cf.seed = seed;
  cf.eps_ratio = eps_ratio;
  cf.nu = Vector::Ones(gc.num_faces);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Index f = 0; f < gc.num_faces; ++f) {
    const auto [i, j] = gc.face_coords(f);
    switch (pattern) {
    case CoefficientPattern::constant: break;
    case CoefficientPattern::channels:
      if (j % 4 == 1) cf.nu[f] = contrast;
      break;
    case CoefficientPattern::checkerboard:
      if ((i / 2 + j / 2) % 2 == 1) cf.nu[f] = contrast;
      break;
    case CoefficientPattern::random_contrast: cf.nu[f] = std::pow(contrast, unif(rng)); break;
    }
  }
  const double nu_min = gc.num_faces > 0 ? cf.nu.minCoeff() : 1.0;
  cf.eps = Vector::Constant(gc.num_edges, eps_ratio * nu_min);
  return cf;
}

} // namespace geneo
