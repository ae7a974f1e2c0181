#pragma once

#include <vector>

#include "dpw/fields.hpp"
#include "dpw/matrix_loop.hpp"

namespace dpw {

// Matrix-valued polynomial sum_d coeffs[d] z^d.
struct PolyMatrix {
  std::vector<CMatrix> coeffs;
  CMatrix eval(Complex z) const;
  int rows() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs[0].rows()); }
};

// Matrix polynomial divided by a scalar polynomial.
struct RationalMatrix {
  PolyMatrix num;
  std::vector<Complex> den{Complex(1, 0)};
  CMatrix eval(Complex z) const;
};

struct Domain {
  enum class Kind { rect, disk };
  Kind kind = Kind::rect;
  Complex lo{-0.5, -0.5};  // rect corners
  Complex hi{0.5, 0.5};
  Complex center{0, 0};    // disk data
  double radius = 1.0;
  bool contains(Complex z) const;
};

// Holomorphic loop-algebra-valued 1-form  eta = (sum_j lambda^j xi_j(z)) dz
// with rational coefficients, the input of the forward pipeline.  Modes are
// >= -1 and each xi_j must satisfy the twisting parity.
struct PotentialTerm {
  int mode = -1;
  RationalMatrix fn;
};

struct PotentialOneForm {
  int n = 2;
  std::vector<PotentialTerm> terms;
  Complex basepoint{0, 0};
  Domain domain;
  std::vector<Complex> poles;  // singularities of the rational coefficients

  // Coefficient loop at a point, degree `degree`, algebra kind.
  MatrixLoop eval_loop(Complex z, int degree) const;
  // Structural residuals: twisting parity of each sampled coefficient and the
  // pole-count of modes below -1 (which must be absent).
  double twist_residual(const GroupModel& model) const;
  void validate() const;

  // A normalized potential lambda^{-1} xi(z) dz with polynomial xi.
  static PotentialOneForm normalized(const PolyMatrix& xi, Complex basepoint,
                                     const Domain& dom);
};

// Type decomposition of a Lie-algebra-valued 1-form alpha = a dz + b dzbar
// into alpha'_p dz, alpha_k (both directions), alpha''_p dzbar with respect to
// the twist projectors.
struct McDecomposition {
  MatrixOneFormField k_form;   // k-parts of both directions
  MatrixField p_dz;            // p-part of the dz direction
  MatrixField p_dzbar;         // p-part of the dzbar direction
};

McDecomposition decompose_mc(const MatrixOneFormField& alpha, const GroupModel& model);

// Insertion of the loop parameter: alpha_lambda =
//   lambda^{-1} alpha'_p dz + alpha_k + lambda alpha''_p dzbar.
LoopOneFormField loopify(const McDecomposition& d, int degree);

struct IntegrationOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-13;
  double pole_radius = 0.05;  // exclusion disk radius around each pole
  int max_steps = 200000;
};

// Piecewise-linear path from z0 to z1 avoiding the exclusion disks around the
// poles.  Throws PoleOnPath when an endpoint sits inside a disk or no detour
// is found.
std::vector<Complex> route_path(Complex z0, Complex z1,
                                const std::vector<Complex>& poles,
                                double pole_radius);

// Solves dF = F eta from F(z0) = I along an explicit path (adaptive embedded
// Runge-Kutta on the truncated loop coefficients).
MatrixLoop integrate_along(const PotentialOneForm& eta,
                           const std::vector<Complex>& path, int degree,
                           const IntegrationOptions& opt = {});

// Same, with automatic pole-avoiding routing from eta.basepoint.
MatrixLoop integrate_holomorphic_to(const PotentialOneForm& eta, Complex target,
                                    int degree, const IntegrationOptions& opt = {});
std::vector<MatrixLoop> integrate_holomorphic(const PotentialOneForm& eta,
                                              const std::vector<Complex>& targets,
                                              int degree,
                                              const IntegrationOptions& opt = {});

// Maurer-Cartan form F^{-1} dF of a sampled map by finite differences
// (6th order, centered where the stencil fits, one-sided near edges).
// Invalid points poison their stencil neighbourhood.
LoopOneFormField mc_form(const LoopField& f);
MatrixOneFormField mc_form_at(const LoopField& f, Complex lambda);

// Maurer-Cartan form via logarithmic transition quotients: the derivative of
// log(F(z)^{-1} F(z+h)) at h = 0.  Same stencils and order as mc_form but
// exact for commuting one-parameter families; requires transitions near the
// identity (frames of moderate variation between neighbours).
LoopOneFormField mc_form_log(const LoopField& f);

// Zero-curvature residual max over interior points of
//   || d_z b - d_zbar a + [a, b] ||  at fixed lambda.
struct FlatnessReport {
  double max_residual = 0;
  double h = 0;  // grid step used by the stencils
};
FlatnessReport flatness_residual(const LoopOneFormField& alpha, Complex lambda);

}  // namespace dpw
