#include "dpw/group_model.hpp"

#include <algorithm>
#include <vector>

namespace dpw {

std::string to_string(RealForm f) {
  return f == RealForm::compact ? "compact" : "indefinite";
}

RealForm real_form_from_string(const std::string& s) {
  if (s == "compact") return RealForm::compact;
  if (s == "indefinite") return RealForm::indefinite;
  throw SchemaError("unknown real form '" + s + "' (expected compact|indefinite)");
}

GroupModel GroupModel::rank_one(RealForm f) {
  GroupModel m;
  m.n = 2;
  m.form = f;
  m.twist = CMatrix::Identity(2, 2);
  m.twist(1, 1) = -1.0;
  m.star = (f == RealForm::compact) ? CMatrix::Identity(2, 2) : m.twist;
  m.cartan = CMatrix::Identity(2, 2);
  return m;
}

CMatrix GroupModel::sigma(const CMatrix& m) const {
  return twist * m * twist.inverse();
}

CMatrix GroupModel::k_part(const CMatrix& m) const { return 0.5 * (m + sigma(m)); }

CMatrix GroupModel::p_part(const CMatrix& m) const { return 0.5 * (m - sigma(m)); }

CMatrix GroupModel::star_matrix(RealForm f) const {
  if (f == RealForm::compact) return CMatrix::Identity(n, n);
  return star;
}

CMatrix GroupModel::tau_group(const CMatrix& m, RealForm f) const {
  const CMatrix s = star_matrix(f);
  return s * m.adjoint().inverse() * s.inverse();
}

CMatrix GroupModel::tau_algebra(const CMatrix& m, RealForm f) const {
  const CMatrix s = star_matrix(f);
  return -s * m.adjoint() * s.inverse();
}

CMatrix GroupModel::theta_algebra(const CMatrix& m) const {
  return -cartan * m.adjoint() * cartan.inverse();
}

double GroupModel::k_group_residual(const CMatrix& m) const {
  return (sigma(m) - m).cwiseAbs().maxCoeff();
}

double GroupModel::real_form_residual(const CMatrix& m, RealForm f) const {
  const CMatrix s = star_matrix(f);
  return (m.adjoint() * s * m - s).cwiseAbs().maxCoeff();
}

double GroupModel::Validation::max() const {
  return std::max({sigma_involutive, tau_involutive, theta_involutive,
                   pairwise_commutation, projector_identity});
}

GroupModel::Validation GroupModel::validate() const {
  Validation v;
  // A basis of the traceless matrices; the involutions are either complex
  // linear (sigma) or conjugate linear (tau, theta), and in both cases they
  // are determined by their values on a complex basis.
  std::vector<CMatrix> basis;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      CMatrix e = CMatrix::Zero(n, n);
      e(i, j) = 1.0;
      basis.push_back(e);
    }
  for (int i = 0; i + 1 < n; ++i) {
    CMatrix e = CMatrix::Zero(n, n);
    e(i, i) = 1.0;
    e(i + 1, i + 1) = -1.0;
    basis.push_back(e);
  }

  auto acc = [](double& slot, double r) { slot = std::max(slot, r); };
  for (const CMatrix& x : basis) {
    acc(v.sigma_involutive, (sigma(sigma(x)) - x).cwiseAbs().maxCoeff());
    acc(v.tau_involutive,
        (tau_algebra(tau_algebra(x, form), form) - x).cwiseAbs().maxCoeff());
    acc(v.theta_involutive,
        (theta_algebra(theta_algebra(x)) - x).cwiseAbs().maxCoeff());
    acc(v.pairwise_commutation,
        (sigma(tau_algebra(x, form)) - tau_algebra(sigma(x), form)).cwiseAbs().maxCoeff());
    acc(v.pairwise_commutation,
        (sigma(theta_algebra(x)) - theta_algebra(sigma(x))).cwiseAbs().maxCoeff());
    acc(v.pairwise_commutation,
        (tau_algebra(theta_algebra(x), form) - theta_algebra(tau_algebra(x, form)))
            .cwiseAbs()
            .maxCoeff());
    acc(v.projector_identity,
        (k_part(x) + p_part(x) - x).cwiseAbs().maxCoeff());
    acc(v.projector_identity,
        (k_part(p_part(x))).cwiseAbs().maxCoeff());
    acc(v.projector_identity,
        (k_part(k_part(x)) - k_part(x)).cwiseAbs().maxCoeff());
  }
  return v;
}

}  // namespace dpw
