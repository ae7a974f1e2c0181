#pragma once

#include <string>

#include "dpw/types.hpp"

namespace dpw {

// Which real form of the complexified group the loops live over.  The compact
// form consists of loops that are unitary on the unit circle; the indefinite
// form of loops unitary with respect to an indefinite inner product.
enum class RealForm { compact, indefinite };

std::string to_string(RealForm f);
RealForm real_form_from_string(const std::string& s);

// Finite-dimensional data describing the symmetric-space model:
//  * twist Q defines the inner involution  sigma(g) = Q g Q^{-1}  whose parity
//    condition twists the loops,
//  * the star matrices define the real-form involutions
//      tau(g)(lambda) = s (g(1/conj(lambda))^H)^{-1} s^{-1},
//  * cartan C defines the antiholomorphic involution
//      theta(g) = C (g^H)^{-1} C^{-1},  theta(X) = -C X^H C^{-1}
//    used when relating a frame to its compact-dual frame.  C transforms by
//    congruence (C -> h C h^H) under a change of base point.
struct GroupModel {
  int n = 2;
  RealForm form = RealForm::compact;
  CMatrix twist;   // Q
  CMatrix star;    // s for the native real form
  CMatrix cartan;  // C

  // The rank-one 2x2 model: Q = diag(1,-1), K the diagonal torus, and
  // s = I (compact) or s = diag(1,-1) (indefinite).  C = I, i.e. theta is the
  // compact star at the reference base point.
  static GroupModel rank_one(RealForm f);

  CMatrix sigma(const CMatrix& m) const;    // Q m Q^{-1}
  CMatrix k_part(const CMatrix& m) const;   // (m + sigma(m)) / 2
  CMatrix p_part(const CMatrix& m) const;   // (m - sigma(m)) / 2

  // Star matrix for a chosen real form (identity for compact, the stored
  // signature matrix for indefinite).
  CMatrix star_matrix(RealForm f) const;

  // Group-level and algebra-level real-form involutions at fixed lambda.
  CMatrix tau_group(const CMatrix& m, RealForm f) const;
  CMatrix tau_algebra(const CMatrix& m, RealForm f) const;

  // Algebra-level Cartan involution theta(X) = -C X^H C^{-1}.
  CMatrix theta_algebra(const CMatrix& m) const;

  // Whether a constant matrix lies in the diagonal subgroup K^C fixed by
  // sigma, and whether it additionally lies in the real form (s-unitary).
  double k_group_residual(const CMatrix& m) const;
  double real_form_residual(const CMatrix& m, RealForm f) const;

  // Residuals of the structural identities (involutivity, commutation of
  // sigma/tau/theta on an algebra basis, projector identities).  Zero for a
  // consistent model.
  struct Validation {
    double sigma_involutive = 0;
    double tau_involutive = 0;
    double theta_involutive = 0;
    double pairwise_commutation = 0;
    double projector_identity = 0;
    double max() const;
  };
  Validation validate() const;
};

}  // namespace dpw
