#include "dpw/matrix_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dpw {

MatrixLoop::MatrixLoop(int n, int degree, LoopKind kind)
    : n_(n), degree_(degree), kind_(kind),
      coeff_(2 * degree + 1, CMatrix::Zero(n, n)) {
  if (n <= 0) throw std::invalid_argument("MatrixLoop: size must be positive");
  if (degree < 0) throw std::invalid_argument("MatrixLoop: degree must be >= 0");
}

MatrixLoop MatrixLoop::identity(int n, int degree) {
  MatrixLoop g(n, degree);
  g.at(0) = CMatrix::Identity(n, n);
  return g;
}

MatrixLoop MatrixLoop::single(int degree, int k, const CMatrix& c, LoopKind kind) {
  MatrixLoop g(static_cast<int>(c.rows()), degree, kind);
  g.at(k) = c;
  return g;
}

const CMatrix& MatrixLoop::at(int k) const {
  if (k < -degree_ || k > degree_)
    throw std::out_of_range("MatrixLoop::at: mode outside window");
  return coeff_[static_cast<size_t>(k + degree_)];
}

CMatrix& MatrixLoop::at(int k) {
  if (k < -degree_ || k > degree_)
    throw std::out_of_range("MatrixLoop::at: mode outside window");
  return coeff_[static_cast<size_t>(k + degree_)];
}

CMatrix MatrixLoop::coeff(int k) const {
  if (k < -degree_ || k > degree_) return CMatrix::Zero(n_, n_);
  return coeff_[static_cast<size_t>(k + degree_)];
}

CMatrix MatrixLoop::evaluate(Complex lambda) const {
  if (lambda == Complex(0, 0))
    throw std::invalid_argument("MatrixLoop::evaluate: lambda must be nonzero");
  CMatrix out = coeff_[static_cast<size_t>(degree_)];
  const Complex mu = 1.0 / lambda;
  Complex lp = 1.0, lm = 1.0;
  for (int k = 1; k <= degree_; ++k) {
    lp *= lambda;
    lm *= mu;
    out += coeff_[static_cast<size_t>(k + degree_)] * lp;
    out += coeff_[static_cast<size_t>(-k + degree_)] * lm;
  }
  return out;
}

double MatrixLoop::wiener_norm() const {
  double s = 0;
  for (const auto& c : coeff_) s += c.norm();
  return s;
}

double MatrixLoop::max_coeff_norm() const {
  double s = 0;
  for (const auto& c : coeff_) s = std::max(s, c.norm());
  return s;
}

double MatrixLoop::mass_above(int mode) const {
  double s = 0;
  for (int k = mode + 1; k <= degree_; ++k) s += at(k).norm();
  return s;
}

double MatrixLoop::mass_below(int mode) const {
  double s = 0;
  for (int k = -degree_; k < mode; ++k) s += at(k).norm();
  return s;
}

MatrixLoop MatrixLoop::truncated(int degree, double* tail) const {
  MatrixLoop out(n_, degree, kind_);
  for (int k = -degree_; k <= degree_; ++k) {
    if (k < -degree || k > degree) {
      if (tail) *tail += at(k).norm();
    } else {
      out.at(k) = at(k);
    }
  }
  return out;
}

double MatrixLoop::zero_modes_below(int mode) {
  double removed = 0;
  for (int k = -degree_; k < mode; ++k) {
    removed += at(k).norm();
    at(k).setZero();
  }
  return removed;
}

double MatrixLoop::zero_modes_above(int mode) {
  double removed = 0;
  for (int k = mode + 1; k <= degree_; ++k) {
    removed += at(k).norm();
    at(k).setZero();
  }
  return removed;
}

MatrixLoop& MatrixLoop::operator+=(const MatrixLoop& o) {
  if (o.n_ != n_ || o.degree_ != degree_)
    throw std::invalid_argument("MatrixLoop: shape mismatch in +=");
  for (size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += o.coeff_[i];
  return *this;
}

MatrixLoop& MatrixLoop::operator-=(const MatrixLoop& o) {
  if (o.n_ != n_ || o.degree_ != degree_)
    throw std::invalid_argument("MatrixLoop: shape mismatch in -=");
  for (size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= o.coeff_[i];
  return *this;
}

MatrixLoop& MatrixLoop::operator*=(Complex s) {
  for (auto& c : coeff_) c *= s;
  return *this;
}

namespace {

bool is_zero_coeff(const CMatrix& c) { return c.squaredNorm() == 0.0; }

}  // namespace

MatrixLoop loop_multiply_full(const MatrixLoop& a, const MatrixLoop& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("loop_multiply: matrix size mismatch");
  MatrixLoop out(a.size(), a.degree() + b.degree(), a.kind());
  for (int i = -a.degree(); i <= a.degree(); ++i) {
    const CMatrix& ca = a.at(i);
    if (is_zero_coeff(ca)) continue;
    for (int j = -b.degree(); j <= b.degree(); ++j) {
      const CMatrix& cb = b.at(j);
      if (is_zero_coeff(cb)) continue;
      out.at(i + j) += ca * cb;
    }
  }
  return out;
}

MatrixLoop loop_multiply(const MatrixLoop& a, const MatrixLoop& b, double* tail) {
  const int deg = std::max(a.degree(), b.degree());
  return loop_multiply_full(a, b).truncated(deg, tail);
}

MatrixLoop loop_inverse(const MatrixLoop& g) {
  const int n = g.size();
  const int N = g.degree();
  const int modes = 2 * N + 1;
  const int dim = modes * n;
  // Window condition on h = g^{-1}: for every target mode m in [-N, N],
  //   sum_{k} c_{m-k} h_k = delta_{m,0} I,
  // stacked columnwise over the columns of h's coefficients.
  CMatrix A = CMatrix::Zero(dim, dim);
  for (int m = -N; m <= N; ++m)
    for (int k = -N; k <= N; ++k) {
      const int d = m - k;
      if (d < -N || d > N) continue;
      const CMatrix& c = g.at(d);
      if (is_zero_coeff(c)) continue;
      A.block((m + N) * n, (k + N) * n, n, n) = c;
    }
  CMatrix rhs = CMatrix::Zero(dim, n);
  rhs.block(N * n, 0, n, n) = CMatrix::Identity(n, n);

  Eigen::PartialPivLU<CMatrix> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 0) || rc < 1e-14)
    throw NumericalBreakdown("loop_inverse: truncated mode-coupling system is singular");
  const CMatrix sol = lu.solve(rhs);

  MatrixLoop h(n, N, g.kind());
  for (int k = -N; k <= N; ++k) h.at(k) = sol.block((k + N) * n, 0, n, n);
  return h;
}

MatrixLoop conjugate_const(const CMatrix& h, const MatrixLoop& g) {
  const CMatrix hinv = h.inverse();
  MatrixLoop out(g.size(), g.degree(), g.kind());
  for (int k = -g.degree(); k <= g.degree(); ++k) out.at(k) = h * g.at(k) * hinv;
  return out;
}

MatrixLoop mul_const_left(const CMatrix& c, const MatrixLoop& g) {
  MatrixLoop out(g.size(), g.degree(), g.kind());
  for (int k = -g.degree(); k <= g.degree(); ++k) out.at(k) = c * g.at(k);
  return out;
}

MatrixLoop mul_const_right(const MatrixLoop& g, const CMatrix& c) {
  MatrixLoop out(g.size(), g.degree(), g.kind());
  for (int k = -g.degree(); k <= g.degree(); ++k) out.at(k) = g.at(k) * c;
  return out;
}

double loop_distance(const MatrixLoop& a, const MatrixLoop& b) {
  const int deg = std::max(a.degree(), b.degree());
  double d = 0;
  for (int k = -deg; k <= deg; ++k) d = std::max(d, (a.coeff(k) - b.coeff(k)).norm());
  return d;
}

TwistReport check_twisted(const MatrixLoop& g, const GroupModel& model) {
  TwistReport r;
  for (int k = -g.degree(); k <= g.degree(); ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    r.max_violation =
        std::max(r.max_violation, (model.sigma(g.at(k)) - sign * g.at(k)).norm());
  }
  return r;
}

MatrixLoop tau_star(const MatrixLoop& g, const GroupModel& model, RealForm f) {
  const CMatrix s = model.star_matrix(f);
  const CMatrix sinv = s.inverse();
  MatrixLoop out(g.size(), g.degree(), g.kind());
  for (int k = -g.degree(); k <= g.degree(); ++k)
    out.at(k) = s * g.at(-k).adjoint() * sinv;
  return out;
}

MatrixLoop tau_star(const MatrixLoop& g, const GroupModel& model) {
  return tau_star(g, model, model.form);
}

double real_form_deviation(const MatrixLoop& g, const GroupModel& model, RealForm f,
                           int samples) {
  const CMatrix s = model.star_matrix(f);
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    const double t = 2.0 * std::numbers::pi * i / samples;
    const CMatrix v = g.evaluate(Complex(std::cos(t), std::sin(t)));
    worst = std::max(worst, (v.adjoint() * s * v - s).cwiseAbs().maxCoeff());
  }
  return worst;
}

MatrixLoop loop_exp(const MatrixLoop& x) {
  const int n = x.size();
  const int N = x.degree();
  // Scaling and squaring: exp(x) = exp(x/2^s)^(2^s); the series for the scaled
  // argument converges fast in the Wiener norm.
  const double norm = x.wiener_norm();
  int s = 0;
  double scaled = norm;
  while (scaled > 0.5) {
    scaled /= 2;
    ++s;
  }
  MatrixLoop base = x;
  base *= std::pow(2.0, -s);

  MatrixLoop result = MatrixLoop::identity(n, N);
  MatrixLoop term = MatrixLoop::identity(n, N);
  for (int k = 1; k <= 40; ++k) {
    term = loop_multiply(term, base);
    term *= 1.0 / k;
    result += term;
    if (term.wiener_norm() < 1e-18) break;
  }
  for (int i = 0; i < s; ++i) result = loop_multiply(result, result);
  result.set_kind(LoopKind::group);
  return result;
}

MatrixLoop loop_log(const MatrixLoop& g) {
  const int n = g.size();
  const int N = g.degree();
  MatrixLoop d = g;
  d -= MatrixLoop::identity(n, N);
  const double norm = d.wiener_norm();
  if (norm > 0.9)
    throw NumericalBreakdown("loop_log: argument too far from the identity");
  // Mercator series log(I + d) = d - d^2/2 + d^3/3 - ...
  MatrixLoop result(n, N, LoopKind::algebra);
  MatrixLoop power = d;
  double sign = 1.0;
  for (int k = 1; k <= 80; ++k) {
    MatrixLoop term = power;
    term *= sign / k;
    result += term;
    if (power.wiener_norm() / (k + 1) < 1e-18) break;
    power = loop_multiply(power, d);
    sign = -sign;
  }
  result.set_kind(LoopKind::algebra);
  return result;
}

}  // namespace dpw
