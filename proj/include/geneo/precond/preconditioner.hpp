#pragma once

/** @file preconditioner.hpp
    @brief One- and two-level additive Schwarz and SORAS preconditioners.

    Every variant has the additive two-level shape
      M^{-1} x = Z E^{-1} Z^T x + (I - P0) sum_i L_i (I - P0^T) x
    with E replaced by E~ (and P0 by P0~) for the inexact variants. The local
    terms L_i are
      AS:            R_i^T (R_i A R_i^T)^{-1} R_i
      SORAS:         R_i^T D_i B_i^{-1} D_i R_i
      SORAS (full):  R_i^T D_i (I - xi0_i) B_i^{-1} D_i R_i
      SORAS inexact: R_i^T D_i (I - eta_i)(I - xi0_i) B_i^{-1} D_i R_i
    One-level methods are the same formulas with the near-kernel coarse space.
*/

#include "geneo/coarse/coarse_space.hpp"
#include "geneo/core/dense.hpp"
#include "geneo/core/error.hpp"
#include "geneo/dd/decomposition.hpp"
#include "geneo/kernel/subdomain_kernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace geneo {

enum class Variant { AS1, SORAS1, AS2, SORAS2, AS2_inexact, SORAS2_inexact };

inline std::string to_string(Variant v)
{
  switch (v) {
  case Variant::AS1: return "AS1";
  case Variant::SORAS1: return "SORAS1";
  case Variant::AS2: return "AS2";
  case Variant::SORAS2: return "SORAS2";
  case Variant::AS2_inexact: return "AS2_inexact";
  case Variant::SORAS2_inexact: return "SORAS2_inexact";
  }
  return "unknown";
}

inline std::optional<Variant> parse_variant(const std::string& s)
{
  for (Variant v : {Variant::AS1, Variant::SORAS1, Variant::AS2, Variant::SORAS2, Variant::AS2_inexact, Variant::SORAS2_inexact})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

inline bool is_soras(Variant v) { return v == Variant::SORAS1 || v == Variant::SORAS2 || v == Variant::SORAS2_inexact; }
inline bool is_inexact(Variant v) { return v == Variant::AS2_inexact || v == Variant::SORAS2_inexact; }
inline bool is_one_level(Variant v) { return v == Variant::AS1 || v == Variant::SORAS1; }

enum class SorasLocalForm { simplified, unsimplified };

/// Non-owning: the decomposition, kernels, coarse space and subspaces must outlive it.
class Preconditioner {
public:
  Preconditioner(Variant variant, const Decomposition& d, const std::vector<SubdomainKernel>& kernels, const CoarseSpace& cs,
                 const std::vector<SorasSubspaces>* soras = nullptr, SorasLocalForm form = SorasLocalForm::simplified)
      : variant_(variant), d_(&d), kernels_(&kernels), cs_(&cs), soras_(soras), form_(form)
  {
    if (static_cast<Index>(kernels.size()) != d.N) throw SizeMismatch("Preconditioner: kernel count does not match subdomain count");
    if (!is_soras(variant))
      for (const auto& sk : kernels)
        if (sk.solver != LocalSolver::dirichlet) throw Error("Preconditioner: " + to_string(variant) + " needs Dirichlet local matrices");
    if (variant == Variant::SORAS2_inexact && (soras == nullptr || static_cast<Index>(soras->size()) != d.N))
      throw Error("Preconditioner: SORAS2_inexact needs the upper-problem subspaces of every subdomain");
    if (is_inexact(variant) && !cs.has_inexact()) throw Error("Preconditioner: " + to_string(variant) + " needs an inexact coarse operator");
  }

  Variant variant() const { return variant_; }
  Index dim() const { return d_->global_dim; }

  /// Sum of local terms for a block of columns.
  Matrix local_sum(const Matrix& y) const
  {
    Matrix s = Matrix::Zero(y.rows(), y.cols());
    for (Index i = 0; i < d_->N; ++i) {
      const auto& sk = (*kernels_)[i];
      const Matrix yi = d_->restrict_to(i, y);
      Matrix zi;
      if (!is_soras(variant_)) {
        zi = sk.B_inv(yi);
      } else {
        const auto Di = d_->D[i].asDiagonal();
        const Matrix v = Di * yi;
        if (variant_ == Variant::SORAS2_inexact)
          zi = Di * (*soras_)[i].B_tilde_dag(v);
        else if (form_ == SorasLocalForm::unsimplified)
          zi = Di * sk.B_dag(v);
        else
          zi = Di * sk.B_inv(v);
      }
      d_->add_extension(i, zi, s);
    }
    return s;
  }

  Matrix apply(const Matrix& x) const
  {
    if (x.rows() != dim()) throw SizeMismatch("Preconditioner::apply: x has " + std::to_string(x.rows()) + " rows, expected " + std::to_string(dim()));
    const bool inex = is_inexact(variant_);
    const Matrix coarse = cs_->coarse_solve(x, inex);
    const Matrix y = x - cs_->P0t(x, inex);
    const Matrix s = local_sum(y);
    return coarse + s - cs_->P0(s, inex);
  }

  Vector apply(const Vector& x) const { return apply(Matrix(x)).col(0); }

private:
  Variant variant_;
  const Decomposition* d_;
  const std::vector<SubdomainKernel>* kernels_;
  const CoarseSpace* cs_;
  const std::vector<SorasSubspaces>* soras_;
  SorasLocalForm form_;
};

} // namespace geneo
