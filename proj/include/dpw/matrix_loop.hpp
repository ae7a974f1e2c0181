#pragma once

#include <optional>
#include <vector>

#include "dpw/group_model.hpp"
#include "dpw/types.hpp"

namespace dpw {

// Whether a loop is meant as a group element (Fourier modes of a map into the
// group) or a Lie-algebra element.  Both satisfy the same twisting parity
// condition; the tag records intent and is carried through exp/log.
enum class LoopKind { group, algebra };

// A matrix-valued Laurent polynomial in the loop parameter lambda, truncated
// to modes in [-N, N]:  g(lambda) = sum_k c_k lambda^k.  This is the working
// representation for all loop-group computations; products are computed
// exactly and re-truncated, with the discarded tail mass available to callers.
class MatrixLoop {
 public:
  MatrixLoop() = default;
  MatrixLoop(int n, int degree, LoopKind kind = LoopKind::group);

  static MatrixLoop identity(int n, int degree);
  // Loop with a single nonzero coefficient c at mode k.
  static MatrixLoop single(int degree, int k, const CMatrix& c,
                           LoopKind kind = LoopKind::group);

  int size() const { return n_; }
  int degree() const { return degree_; }
  LoopKind kind() const { return kind_; }
  void set_kind(LoopKind k) { kind_ = k; }

  // Coefficient access; `coeff` returns zero outside the window.
  const CMatrix& at(int k) const;
  CMatrix& at(int k);
  CMatrix coeff(int k) const;

  CMatrix evaluate(Complex lambda) const;

  double wiener_norm() const;        // sum_k Frobenius norm of c_k
  double max_coeff_norm() const;     // max_k Frobenius norm of c_k
  double mass_above(int mode) const;   // sum over k > mode
  double mass_below(int mode) const;   // sum over k < mode

  // Re-truncation to a new degree; the Wiener mass of any dropped modes is
  // accumulated into *tail when given.
  MatrixLoop truncated(int degree, double* tail = nullptr) const;

  // Exact zeroing of a mode range (used to make one-sided factors structurally
  // exact); returns the mass removed.
  double zero_modes_below(int mode);
  double zero_modes_above(int mode);

  MatrixLoop& operator+=(const MatrixLoop& o);
  MatrixLoop& operator-=(const MatrixLoop& o);
  MatrixLoop& operator*=(Complex s);

  friend MatrixLoop operator+(MatrixLoop a, const MatrixLoop& b) { return a += b; }
  friend MatrixLoop operator-(MatrixLoop a, const MatrixLoop& b) { return a -= b; }
  friend MatrixLoop operator*(Complex s, MatrixLoop a) { return a *= s; }

 private:
  int n_ = 0;
  int degree_ = 0;
  LoopKind kind_ = LoopKind::group;
  std::vector<CMatrix> coeff_;  // index k + degree_
};

// Cauchy product truncated to max(deg a, deg b); discarded tail mass is added
// to *tail when given.
MatrixLoop loop_multiply(const MatrixLoop& a, const MatrixLoop& b,
                         double* tail = nullptr);
// Product at full degree deg a + deg b (no truncation loss).
MatrixLoop loop_multiply_full(const MatrixLoop& a, const MatrixLoop& b);

// Truncated inverse: the unique window h with modes [-N, N] of g*h equal to
// those of the identity.  Throws NumericalBreakdown when the mode-coupling
// system is singular.  For loops supported on one side of mode zero this
// agrees with the exact (terminating) geometric-series inverse.
MatrixLoop loop_inverse(const MatrixLoop& g);

// Constant conjugation h g h^{-1} and one-sided constant products.
MatrixLoop conjugate_const(const CMatrix& h, const MatrixLoop& g);
MatrixLoop mul_const_left(const CMatrix& c, const MatrixLoop& g);
MatrixLoop mul_const_right(const MatrixLoop& g, const CMatrix& c);

// max_k Frobenius norm of (a - b)_k.
double loop_distance(const MatrixLoop& a, const MatrixLoop& b);

// Twisting audit: residual of sigma(c_k) = (-1)^k c_k over the window.
struct TwistReport {
  double max_violation = 0;
  bool ok(double tol = kStructuralTol) const { return max_violation <= tol; }
};
TwistReport check_twisted(const MatrixLoop& g, const GroupModel& model);

// Real-form star g*(lambda) = s g(1/conj(lambda))^H s^{-1}; an
// anti-homomorphism of the truncated algebra (coefficient rule
// c_k -> s c_{-k}^H s^{-1}, no truncation loss).
MatrixLoop tau_star(const MatrixLoop& g, const GroupModel& model, RealForm f);
MatrixLoop tau_star(const MatrixLoop& g, const GroupModel& model);

// Pointwise deviation of g from its real form on `samples` points of the unit
// circle: max || g(lambda)^H s g(lambda) - s ||.
double real_form_deviation(const MatrixLoop& g, const GroupModel& model,
                           RealForm f, int samples = 16);

// Exponential of a (truncated) algebra loop by scaling and squaring, and
// logarithm of a group loop near the identity by the Mercator series.
MatrixLoop loop_exp(const MatrixLoop& x);
MatrixLoop loop_log(const MatrixLoop& g);

}  // namespace dpw
