#pragma once

#include <cstdint>

#include "dpw/matrix_loop.hpp"

namespace dpw {

// SplitMix64: tiny, fast, reproducible across platforms.  All randomized
// checks draw through this so a fixed seed fixes the whole run.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double sym(double scale = 1.0) { return scale * (2.0 * uniform() - 1.0); }
  Complex cplx(double scale = 1.0) { return {sym(scale), sym(scale)}; }
};

// Random twisted algebra loop for the rank-one model: even modes diagonal
// traceless, odd modes off-diagonal, coefficients decaying geometrically.
// With `real_form` set, negative modes are slaved to positive ones by
// xi_{-k} = -s xi_k^H s^{-1} and the constant mode is s-anti-Hermitian, so
// the exponential lies in the real form (up to truncation tails).
inline MatrixLoop random_twisted_algebra_loop(SplitMix64& rng, const GroupModel& model,
                                              int degree, int max_mode, double scale,
                                              bool real_form = false) {
  MatrixLoop x(2, degree, LoopKind::algebra);
  const double decay = 0.5;
  auto coeff = [&](int k) {
    CMatrix c = CMatrix::Zero(2, 2);
    const double s = scale * std::pow(decay, std::abs(k));
    if (k % 2 == 0) {
      const Complex d = rng.cplx(s);
      c(0, 0) = d;
      c(1, 1) = -d;
    } else {
      c(0, 1) = rng.cplx(s);
      c(1, 0) = rng.cplx(s);
    }
    return c;
  };
  if (!real_form) {
    for (int k = -max_mode; k <= max_mode; ++k) x.at(k) = coeff(k);
    return x;
  }
  const CMatrix s = model.star_matrix(model.form);
  for (int k = 1; k <= max_mode; ++k) {
    x.at(k) = coeff(k);
    x.at(-k) = -s * x.at(k).adjoint() * s.inverse();
  }
  CMatrix c0 = CMatrix::Zero(2, 2);
  c0(0, 0) = Complex(0, rng.sym(scale));
  c0(1, 1) = -c0(0, 0);
  x.at(0) = c0;
  return x;
}

inline MatrixLoop random_twisted_group_loop(SplitMix64& rng, const GroupModel& model,
                                            int degree, int max_mode, double scale,
                                            bool real_form = false) {
  return loop_exp(
      random_twisted_algebra_loop(rng, model, degree, max_mode, scale, real_form));
}

// Random element of the real diagonal torus (phases).
inline CMatrix random_torus_element(SplitMix64& rng) {
  const double a = 3.1 * rng.sym();
  CMatrix u = CMatrix::Zero(2, 2);
  u(0, 0) = Complex(std::cos(a), std::sin(a));
  u(1, 1) = Complex(std::cos(a), -std::sin(a));
  return u;
}

}  // namespace dpw
