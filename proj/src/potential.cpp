#include "dpw/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace dpw {

CMatrix PolyMatrix::eval(Complex z) const {
  if (coeffs.empty()) throw std::invalid_argument("PolyMatrix: empty polynomial");
  CMatrix acc = coeffs.back();
  for (int d = static_cast<int>(coeffs.size()) - 2; d >= 0; --d)
    acc = acc * z + coeffs[static_cast<size_t>(d)];
  return acc;
}

CMatrix RationalMatrix::eval(Complex z) const {
  if (den.empty()) throw std::invalid_argument("RationalMatrix: empty denominator");
  Complex d = den.back();
  for (int k = static_cast<int>(den.size()) - 2; k >= 0; --k)
    d = d * z + den[static_cast<size_t>(k)];
  if (std::abs(d) < 1e-300)
    throw NumericalBreakdown("RationalMatrix: evaluation at a pole, z = " +
                             complex_to_string(z));
  return num.eval(z) / d;
}

bool Domain::contains(Complex z) const {
  if (kind == Kind::disk) return std::abs(z - center) <= radius;
  return z.real() >= lo.real() - 1e-12 && z.real() <= hi.real() + 1e-12 &&
         z.imag() >= lo.imag() - 1e-12 && z.imag() <= hi.imag() + 1e-12;
}

MatrixLoop PotentialOneForm::eval_loop(Complex z, int degree) const {
  MatrixLoop out(n, degree, LoopKind::algebra);
  for (const auto& t : terms) {
    if (t.mode < -degree || t.mode > degree)
      throw std::invalid_argument("PotentialOneForm: mode outside loop window");
    out.at(t.mode) += t.fn.eval(z);
  }
  return out;
}

double PotentialOneForm::twist_residual(const GroupModel& model) const {
  // Sample the coefficients at a few generic points of the domain.
  const Complex probes[] = {basepoint, basepoint + Complex(0.11, 0.07),
                            basepoint + Complex(-0.13, 0.05)};
  double worst = 0;
  for (Complex z : probes) {
    bool near_pole = false;
    for (Complex p : poles)
      if (std::abs(z - p) < 1e-6) near_pole = true;
    if (near_pole || !domain.contains(z)) continue;
    for (const auto& t : terms) {
      const CMatrix v = t.fn.eval(z);
      const double sign = (t.mode % 2 == 0) ? 1.0 : -1.0;
      worst = std::max(worst, (model.sigma(v) - sign * v).norm());
    }
  }
  return worst;
}

void PotentialOneForm::validate() const {
  if (n <= 0) throw SchemaError("potential: matrix size must be positive");
  for (const auto& t : terms) {
    if (t.mode < -1)
      throw SchemaError("potential: modes below -1 are not allowed");
    if (t.fn.num.rows() != n)
      throw SchemaError("potential: coefficient size does not match n");
  }
  if (!domain.contains(basepoint))
    throw SchemaError("potential: base point outside the domain");
  for (Complex p : poles)
    if (std::abs(p - basepoint) < 1e-12)
      throw SchemaError("potential: base point coincides with a pole");
}

PotentialOneForm PotentialOneForm::normalized(const PolyMatrix& xi, Complex basepoint,
                                              const Domain& dom) {
  PotentialOneForm eta;
  eta.n = xi.rows();
  eta.basepoint = basepoint;
  eta.domain = dom;
  PotentialTerm t;
  t.mode = -1;
  t.fn.num = xi;
  t.fn.den = {Complex(1, 0)};
  eta.terms.push_back(t);
  return eta;
}

namespace {

double segment_distance(Complex a, Complex b, Complex p) {
  const Complex d = b - a;
  const double l2 = std::norm(d);
  if (l2 == 0) return std::abs(p - a);
  double t = ((p - a) * std::conj(d)).real() / l2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(a + t * d - p);
}

void route_segment(Complex a, Complex b, const std::vector<Complex>& poles,
                   double r, int depth, std::vector<Complex>& out) {
  // Clearance slightly above the exclusion radius so the integrator never
  // grazes a disk boundary.
  const double clear = 1.05 * r;
  int worst = -1;
  double worst_d = clear;
  for (size_t i = 0; i < poles.size(); ++i) {
    const double d = segment_distance(a, b, poles[i]);
    if (d < worst_d) {
      worst_d = d;
      worst = static_cast<int>(i);
    }
  }
  if (worst < 0) {
    out.push_back(b);
    return;
  }
  if (depth >= 12)
    throw PoleOnPath("route_path: no pole-free detour found near " +
                         complex_to_string(poles[static_cast<size_t>(worst)]),
                     poles[static_cast<size_t>(worst)]);

  const Complex p = poles[static_cast<size_t>(worst)];
  const Complex dir = (b - a) / std::abs(b - a);
  const Complex nrm(-dir.imag(), dir.real());
  double t = ((p - a) * std::conj(b - a)).real() / std::norm(b - a);
  t = std::clamp(t, 0.05, 0.95);
  const Complex foot = a + t * (b - a);

  // Pick the detour side with the larger clearance from all poles.
  auto clearance = [&](Complex w) {
    double c = 1e300;
    for (Complex q : poles) c = std::min(c, std::abs(w - q));
    return c;
  };
  const Complex wp = foot + nrm * (2.5 * r);
  const Complex wm = foot - nrm * (2.5 * r);
  const Complex w = (clearance(wp) >= clearance(wm)) ? wp : wm;
  route_segment(a, w, poles, r, depth + 1, out);
  route_segment(w, b, poles, r, depth + 1, out);
}

}  // namespace

std::vector<Complex> route_path(Complex z0, Complex z1,
                                const std::vector<Complex>& poles,
                                double pole_radius) {
  for (Complex p : poles) {
    if (std::abs(z0 - p) <= pole_radius)
      throw PoleOnPath("route_path: start point inside the exclusion disk of " +
                           complex_to_string(p),
                       p);
    if (std::abs(z1 - p) <= pole_radius)
      throw PoleOnPath("route_path: target inside the exclusion disk of " +
                           complex_to_string(p),
                       p);
  }
  std::vector<Complex> path{z0};
  if (z0 != z1) route_segment(z0, z1, poles, pole_radius, 0, path);
  return path;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kC[7] = {0, 1. / 5, 3. / 10, 4. / 5, 8. / 9, 1., 1.};
constexpr double kA[7][6] = {
    {},
    {1. / 5},
    {3. / 40, 9. / 40},
    {44. / 45, -56. / 15, 32. / 9},
    {19372. / 6561, -25360. / 2187, 64448. / 6561, -212. / 729},
    {9017. / 3168, -355. / 33, 46732. / 5247, 49. / 176, -5103. / 18656},
    {35. / 384, 0, 500. / 1113, 125. / 192, -2187. / 6784, 11. / 84}};
constexpr double kB5[7] = {35. / 384,     0, 500. / 1113, 125. / 192,
                           -2187. / 6784, 11. / 84,       0};
constexpr double kB4[7] = {5179. / 57600,    0,          7571. / 16695, 393. / 640,
                           -92097. / 339200, 187. / 2100, 1. / 40};

}  // namespace

MatrixLoop integrate_along(const PotentialOneForm& eta,
                           const std::vector<Complex>& path, int degree,
                           const IntegrationOptions& opt) {
  if (path.empty()) throw std::invalid_argument("integrate_along: empty path");
  MatrixLoop F = MatrixLoop::identity(eta.n, degree);
  int steps_left = opt.max_steps;

  for (size_t seg = 0; seg + 1 < path.size(); ++seg) {
    const Complex za = path[seg];
    const Complex zb = path[seg + 1];
    const Complex dz = zb - za;
    if (dz == Complex(0, 0)) continue;

    auto rhs = [&](double t, const MatrixLoop& y) {
      MatrixLoop h = eta.eval_loop(za + t * dz, degree);
      h *= dz;
      return loop_multiply(y, h);
    };

    double t = 0;
    double h = 0.1;
    while (t < 1.0) {
      if (--steps_left <= 0)
        throw NumericalBreakdown("integrate_along: step budget exhausted");
      h = std::min(h, 1.0 - t);

      MatrixLoop k[7];
      k[0] = rhs(t, F);
      for (int i = 1; i < 7; ++i) {
        MatrixLoop y = F;
        for (int j = 0; j < i; ++j) {
          if (kA[i][j] == 0) continue;
          MatrixLoop term = k[j];
          term *= h * kA[i][j];
          y += term;
        }
        k[i] = rhs(t + kC[i] * h, y);
      }

      MatrixLoop y5 = F;
      MatrixLoop err(eta.n, degree);
      for (int i = 0; i < 7; ++i) {
        if (kB5[i] != 0) {
          MatrixLoop term = k[i];
          term *= h * kB5[i];
          y5 += term;
        }
        if (kB5[i] != kB4[i]) {
          MatrixLoop term = k[i];
          term *= h * (kB5[i] - kB4[i]);
          err += term;
        }
      }

      const double tol =
          opt.abs_tol + opt.rel_tol * std::max(F.max_coeff_norm(), y5.max_coeff_norm());
      const double e = err.max_coeff_norm();
      if (e <= tol) {
        t += h;
        F = y5;
      }
      const double factor = (e > 0) ? 0.9 * std::pow(tol / e, 0.2) : 5.0;
      h *= std::clamp(factor, 0.2, 5.0);
      if (h < 1e-14)
        throw NumericalBreakdown("integrate_along: step size underflow near " +
                                 complex_to_string(za + t * dz));
    }
  }
  return F;
}

MatrixLoop integrate_holomorphic_to(const PotentialOneForm& eta, Complex target,
                                    int degree, const IntegrationOptions& opt) {
  if (!eta.domain.contains(target))
    throw std::invalid_argument("integrate_holomorphic: target " +
                                complex_to_string(target) + " outside the domain");
  const auto path = route_path(eta.basepoint, target, eta.poles, opt.pole_radius);
  return integrate_along(eta, path, degree, opt);
}

std::vector<MatrixLoop> integrate_holomorphic(const PotentialOneForm& eta,
                                              const std::vector<Complex>& targets,
                                              int degree,
                                              const IntegrationOptions& opt) {
  std::vector<MatrixLoop> out;
  out.reserve(targets.size());
  for (Complex z : targets) out.push_back(integrate_holomorphic_to(eta, z, degree, opt));
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference stencils.

namespace {

struct Stencil {
  // (offset, weight) taps; weights already include the 1/h factor.
  std::vector<std::pair<int, double>> taps;
  bool centered = false;  // evaluation point sits in the middle of the taps
};

// Half-width of the difference cluster an axis of n points supports: 8th
// order (radius 4) from 13 points, 6th order from 7, 4th from 5, 2nd from 3.
// The step up at 13 keeps audits that differentiate twice (curvature of a
// differentiated connection form) comfortably below their tolerances on the
// default grids; below 13 points the wider cluster would push most positions
// into one-sided stencils and lose more than it gains.
int stencil_radius(int n) {
  if (n >= 13) return 4;
  if (n >= 7) return 3;
  if (n >= 5) return 2;
  if (n >= 3) return 1;
  throw SchemaError("finite differences need at least 3 points per axis");
}

// First-derivative weights at node 0 for the given node offsets (Fornberg's
// recursion); exact for polynomials of degree < taps, so the order equals
// taps - 1.
std::vector<double> fd_weights(const std::vector<int>& offsets) {
  const int m = static_cast<int>(offsets.size());
  std::vector<std::array<double, 2>> c(static_cast<size_t>(m), {0.0, 0.0});
  double c1 = 1.0;
  double c4 = offsets[0];
  c[0][0] = 1.0;
  for (int i = 1; i < m; ++i) {
    double c2 = 1.0;
    const double c5 = c4;
    c4 = offsets[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) {
      const double c3 = offsets[static_cast<size_t>(i)] - offsets[static_cast<size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        c[static_cast<size_t>(i)][1] =
            c1 * (c[static_cast<size_t>(i - 1)][0] - c5 * c[static_cast<size_t>(i - 1)][1]) / c2;
        c[static_cast<size_t>(i)][0] = -c1 * c5 * c[static_cast<size_t>(i - 1)][0] / c2;
      }
      c[static_cast<size_t>(j)][1] =
          (c4 * c[static_cast<size_t>(j)][1] - c[static_cast<size_t>(j)][0]) / c3;
      c[static_cast<size_t>(j)][0] = c4 * c[static_cast<size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) w[static_cast<size_t>(i)] = c[static_cast<size_t>(i)][1];
  return w;
}

// First-derivative stencil at position p of an n-point axis with spacing h.
// Off-centre clusters get two extra taps: one-sided differences of the same
// width have a much larger truncation constant, and audits that differentiate
// the result a second time would amplify the edge/interior error mismatch.
Stencil stencil_for(int p, int n, double h) {
  const int r = stencil_radius(n);
  int width = 2 * r + 1;
  int start = std::clamp(p - r, 0, n - width);
  Stencil s;
  s.centered = (start == p - r);
  if (!s.centered && n > width) {
    width = std::min(n, width + 2);
    start = std::clamp(p - r - 1, 0, n - width);
  }
  std::vector<int> offsets(static_cast<size_t>(width));
  for (int i = 0; i < width; ++i) offsets[static_cast<size_t>(i)] = start + i - p;
  const std::vector<double> w = fd_weights(offsets);
  for (int i = 0; i < width; ++i)
    s.taps.emplace_back(offsets[static_cast<size_t>(i)], w[static_cast<size_t>(i)] / h);
  return s;
}

template <class T, class ValueAt>
T stencil_apply(const Stencil& s, ValueAt&& value_at) {
  T acc = s.taps[0].second * value_at(s.taps[0].first);
  for (size_t i = 1; i < s.taps.size(); ++i)
    acc += s.taps[i].second * value_at(s.taps[i].first);
  return acc;
}

template <class ValidAt>
bool stencil_valid(const Stencil& s, ValidAt&& valid_at) {
  for (auto [o, w] : s.taps)
    if (!valid_at(o)) return false;
  return true;
}

// Positions whose stencil is fully centered (no one-sided boundary bias).
bool is_interior(int p, int n) {
  const int r = stencil_radius(n);
  return p >= r && p <= n - 1 - r;
}

}  // namespace

LoopOneFormField mc_form(const LoopField& f) {
  const GridSpec& g = f.grid;
  g.validate();
  if (g.nx < 3 || g.ny < 3)
    throw SchemaError("mc_form: need at least a 3x3 grid");
  LoopOneFormField out;
  out.grid = g;
  out.dz.assign(static_cast<size_t>(g.points()), MatrixLoop());
  out.dzbar.assign(static_cast<size_t>(g.points()), MatrixLoop());
  out.valid.assign(static_cast<size_t>(g.points()), 0);

  const Complex I(0, 1);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Stencil sx = stencil_for(ix, g.nx, g.dx());
      const Stencil sy = stencil_for(iy, g.ny, g.dy());
      if (!f.ok(ix, iy) ||
          !stencil_valid(sx, [&](int o) { return f.ok(ix + o, iy); }) ||
          !stencil_valid(sy, [&](int o) { return f.ok(ix, iy + o); }))
        continue;
      try {
        const MatrixLoop finv = loop_inverse(f.at(ix, iy));
        const MatrixLoop dx = stencil_apply<MatrixLoop>(
            sx, [&](int o) -> const MatrixLoop& { return f.at(ix + o, iy); });
        const MatrixLoop dy = stencil_apply<MatrixLoop>(
            sy, [&](int o) -> const MatrixLoop& { return f.at(ix, iy + o); });
        MatrixLoop ddz = dx;
        {
          MatrixLoop t = dy;
          t *= -I;
          ddz += t;
          ddz *= 0.5;
        }
        MatrixLoop ddzbar = dx;
        {
          MatrixLoop t = dy;
          t *= I;
          ddzbar += t;
          ddzbar *= 0.5;
        }
        const int idx = g.index(ix, iy);
        out.dz[static_cast<size_t>(idx)] = loop_multiply(finv, ddz);
        out.dzbar[static_cast<size_t>(idx)] = loop_multiply(finv, ddzbar);
        out.dz[static_cast<size_t>(idx)].set_kind(LoopKind::algebra);
        out.dzbar[static_cast<size_t>(idx)].set_kind(LoopKind::algebra);
        out.valid[static_cast<size_t>(idx)] = 1;
      } catch (const Error&) {
        // leave the point invalid
      }
    }
  return out;
}

MatrixOneFormField mc_form_at(const LoopField& f, Complex lambda) {
  LoopOneFormField lf = mc_form(f);
  MatrixOneFormField out;
  out.grid = lf.grid;
  out.valid = lf.valid;
  out.dz.assign(lf.dz.size(), CMatrix());
  out.dzbar.assign(lf.dz.size(), CMatrix());
  for (size_t i = 0; i < lf.dz.size(); ++i) {
    if (!lf.valid[i]) continue;
    out.dz[i] = lf.dz[i].evaluate(lambda);
    out.dzbar[i] = lf.dzbar[i].evaluate(lambda);
  }
  return out;
}

LoopOneFormField mc_form_log(const LoopField& f) {
  const GridSpec& g = f.grid;
  g.validate();
  if (g.nx < 3 || g.ny < 3)
    throw SchemaError("mc_form_log: need at least a 3x3 grid");
  LoopOneFormField out;
  out.grid = g;
  out.dz.assign(static_cast<size_t>(g.points()), MatrixLoop());
  out.dzbar.assign(static_cast<size_t>(g.points()), MatrixLoop());
  out.valid.assign(static_cast<size_t>(g.points()), 0);

  const Complex I(0, 1);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const Stencil sx = stencil_for(ix, g.nx, g.dx());
      const Stencil sy = stencil_for(iy, g.ny, g.dy());
      if (!f.ok(ix, iy) ||
          !stencil_valid(sx, [&](int o) { return f.ok(ix + o, iy); }) ||
          !stencil_valid(sy, [&](int o) { return f.ok(ix, iy + o); }))
        continue;
      try {
        const MatrixLoop& base = f.at(ix, iy);
        const MatrixLoop binv = loop_inverse(base);
        const int n = base.size();
        const int N = base.degree();
        const MatrixLoop zero(n, N, LoopKind::algebra);
        // Transition logarithm at a given stencil offset; the log of the
        // identity transition at offset zero vanishes exactly.  Off-centre
        // clusters reach transitions up to 2r steps away, which can leave the
        // convergence region of the logarithm, so boundary points fall back
        // to plain differences of the frame followed by left translation.
        auto omega = [&](int ox, int oy) {
          if (ox == 0 && oy == 0) return zero;
          return loop_log(loop_multiply(binv, f.at(ix + ox, iy + oy)));
        };
        const bool log_path = sx.centered && sy.centered;
        const MatrixLoop dx =
            log_path ? stencil_apply<MatrixLoop>(sx, [&](int o) { return omega(o, 0); })
                     : loop_multiply(binv, stencil_apply<MatrixLoop>(
                                               sx, [&](int o) -> const MatrixLoop& {
                                                 return f.at(ix + o, iy);
                                               }));
        const MatrixLoop dy =
            log_path ? stencil_apply<MatrixLoop>(sy, [&](int o) { return omega(0, o); })
                     : loop_multiply(binv, stencil_apply<MatrixLoop>(
                                               sy, [&](int o) -> const MatrixLoop& {
                                                 return f.at(ix, iy + o);
                                               }));
        MatrixLoop ddz = dx;
        {
          MatrixLoop t = dy;
          t *= -I;
          ddz += t;
          ddz *= 0.5;
        }
        MatrixLoop ddzbar = dx;
        {
          MatrixLoop t = dy;
          t *= I;
          ddzbar += t;
          ddzbar *= 0.5;
        }
        const int idx = g.index(ix, iy);
        ddz.set_kind(LoopKind::algebra);
        ddzbar.set_kind(LoopKind::algebra);
        out.dz[static_cast<size_t>(idx)] = ddz;
        out.dzbar[static_cast<size_t>(idx)] = ddzbar;
        out.valid[static_cast<size_t>(idx)] = 1;
      } catch (const Error&) {
        // leave the point invalid
      }
    }
  return out;
}

McDecomposition decompose_mc(const MatrixOneFormField& alpha, const GroupModel& model) {
  McDecomposition d;
  d.k_form.grid = alpha.grid;
  d.k_form.valid = alpha.valid;
  d.k_form.dz.assign(alpha.dz.size(), CMatrix());
  d.k_form.dzbar.assign(alpha.dz.size(), CMatrix());
  d.p_dz.grid = alpha.grid;
  d.p_dz.valid = alpha.valid;
  d.p_dz.values.assign(alpha.dz.size(), CMatrix());
  d.p_dzbar.grid = alpha.grid;
  d.p_dzbar.valid = alpha.valid;
  d.p_dzbar.values.assign(alpha.dz.size(), CMatrix());
  for (size_t i = 0; i < alpha.dz.size(); ++i) {
    if (!alpha.valid[i]) continue;
    d.k_form.dz[i] = model.k_part(alpha.dz[i]);
    d.k_form.dzbar[i] = model.k_part(alpha.dzbar[i]);
    d.p_dz.values[i] = model.p_part(alpha.dz[i]);
    d.p_dzbar.values[i] = model.p_part(alpha.dzbar[i]);
  }
  return d;
}

LoopOneFormField loopify(const McDecomposition& d, int degree) {
  if (degree < 1) throw std::invalid_argument("loopify: degree must be >= 1");
  LoopOneFormField out;
  out.grid = d.k_form.grid;
  out.valid = d.k_form.valid;
  const size_t m = d.k_form.dz.size();
  out.dz.assign(m, MatrixLoop());
  out.dzbar.assign(m, MatrixLoop());
  for (size_t i = 0; i < m; ++i) {
    if (!out.valid[i]) continue;
    const int n = static_cast<int>(d.k_form.dz[i].rows());
    MatrixLoop a(n, degree, LoopKind::algebra);
    a.at(-1) = d.p_dz.values[i];
    a.at(0) = d.k_form.dz[i];
    MatrixLoop b(n, degree, LoopKind::algebra);
    b.at(0) = d.k_form.dzbar[i];
    b.at(1) = d.p_dzbar.values[i];
    out.dz[i] = a;
    out.dzbar[i] = b;
  }
  return out;
}

FlatnessReport flatness_residual(const LoopOneFormField& alpha, Complex lambda) {
  const GridSpec& g = alpha.grid;
  g.validate();
  if (g.nx < 3 || g.ny < 3)
    throw SchemaError("flatness_residual: need at least a 3x3 grid");

  // Evaluate the form at lambda once.
  std::vector<CMatrix> a(alpha.dz.size()), b(alpha.dz.size());
  for (size_t i = 0; i < alpha.dz.size(); ++i) {
    if (!alpha.valid[i]) continue;
    a[i] = alpha.dz[i].evaluate(lambda);
    b[i] = alpha.dzbar[i].evaluate(lambda);
  }

  FlatnessReport rep;
  rep.h = std::max(g.dx(), g.dy());
  const Complex I(0, 1);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      if (!is_interior(ix, g.nx) || !is_interior(iy, g.ny)) continue;
      const Stencil sx = stencil_for(ix, g.nx, g.dx());
      const Stencil sy = stencil_for(iy, g.ny, g.dy());
      if (!alpha.ok(ix, iy) ||
          !stencil_valid(sx, [&](int o) { return alpha.ok(ix + o, iy); }) ||
          !stencil_valid(sy, [&](int o) { return alpha.ok(ix, iy + o); }))
        continue;
      auto aval = [&](int ox, int oy) -> const CMatrix& {
        return a[static_cast<size_t>(g.index(ix + ox, iy + oy))];
      };
      auto bval = [&](int ox, int oy) -> const CMatrix& {
        return b[static_cast<size_t>(g.index(ix + ox, iy + oy))];
      };
      const CMatrix bx =
          stencil_apply<CMatrix>(sx, [&](int o) { return bval(o, 0); });
      const CMatrix by =
          stencil_apply<CMatrix>(sy, [&](int o) { return bval(0, o); });
      const CMatrix ax =
          stencil_apply<CMatrix>(sx, [&](int o) { return aval(o, 0); });
      const CMatrix ay =
          stencil_apply<CMatrix>(sy, [&](int o) { return aval(0, o); });
      const CMatrix dzb = 0.5 * (bx - I * by);
      const CMatrix dzbara = 0.5 * (ax + I * ay);
      const CMatrix& av = aval(0, 0);
      const CMatrix& bv = bval(0, 0);
      const CMatrix res = dzb - dzbara + av * bv - bv * av;
      rep.max_residual = std::max(rep.max_residual, res.norm());
    }
  return rep;
}

}  // namespace dpw
