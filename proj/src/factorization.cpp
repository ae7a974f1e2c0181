#include "dpw/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace dpw {

namespace {

bool is_zero_coeff(const CMatrix& c) { return c.squaredNorm() == 0.0; }

// Inverse of a loop supported on modes <= 0 with identity constant term.
// The mode recursion terminates inside the window, so this is exact there.
MatrixLoop minus_unipotent_inverse(const MatrixLoop& x) {
  const int n = x.size();
  const int N = x.degree();
  MatrixLoop y(n, N, x.kind());
  y.at(0) = CMatrix::Identity(n, n);
  for (int m = 1; m <= N; ++m) {
    CMatrix acc = CMatrix::Zero(n, n);
    for (int j = 1; j <= m; ++j) {
      const CMatrix& c = x.at(-j);
      if (is_zero_coeff(c)) continue;
      acc += c * y.at(-(m - j));
    }
    y.at(-m) = -acc;
  }
  return y;
}

}  // namespace

BirkhoffPair birkhoff_split(const MatrixLoop& g, const GroupModel& model,
                            const FactorOptions& opt) {
  (void)model;
  const int n = g.size();
  const int N = g.degree();
  BirkhoffPair out;

  if (N == 0) {
    out.minus = MatrixLoop::identity(n, 0);
    out.plus = g;
    out.rcond = 1.0;
    return out;
  }

  // Solve for x = minus^{-1} supported on modes [-N, 0] with x_0 = I, from the
  // requirement that x * g has no negative modes:
  //   sum_{j=1..N} x_{-j} g_{j-m} = -g_{-m},   m = 1..N.
  // Row r of each x_{-j} couples only to row r of the data, giving one
  // block-Toeplitz system with n right-hand sides.
  const int dim = N * n;
  CMatrix A = CMatrix::Zero(dim, dim);
  for (int m = 1; m <= N; ++m)
    for (int j = 1; j <= N; ++j) {
      const int d = j - m;
      if (d < -N || d > N) continue;
      const CMatrix& c = g.at(d);
      if (is_zero_coeff(c)) continue;
      A.block((m - 1) * n, (j - 1) * n, n, n) = c.transpose();
    }
  CMatrix rhs = CMatrix::Zero(dim, n);
  for (int m = 1; m <= N; ++m)
    rhs.block((m - 1) * n, 0, n, n) = -g.at(-m).transpose();

  Eigen::PartialPivLU<CMatrix> lu(A);
  const double rc = lu.rcond();
  if (!(rc >= opt.rcond_threshold))
    throw OutsideBigCell(
        "birkhoff_split: loop is outside the big cell (mode system rcond " +
            std::to_string(rc) + ")",
        rc);
  const CMatrix sol = lu.solve(rhs);

  MatrixLoop x(n, N, g.kind());
  x.at(0) = CMatrix::Identity(n, n);
  for (int j = 1; j <= N; ++j)
    x.at(-j) = sol.block((j - 1) * n, 0, n, n).transpose();

  out.minus = minus_unipotent_inverse(x);
  out.plus = loop_multiply(x, g);
  out.structural_cleanup = out.plus.zero_modes_below(0);
  out.rcond = rc;
  out.reconstruction = loop_distance(loop_multiply(out.minus, out.plus), g);

  const double scale = std::max(1.0, g.max_coeff_norm());
  if (out.reconstruction > 1e-6 * scale)
    throw OutsideBigCell(
        "birkhoff_split: factor reconstruction failed (residual " +
            std::to_string(out.reconstruction) + "), loop outside the big cell",
        rc);
  return out;
}

namespace {

// Upper-triangular U with positive diagonal solving U^H s U = s P0, the
// signature-aware Cholesky factorization.  Empty when a pivot has the wrong
// sign, i.e. P0 is not in the image of the quadratic map.
std::optional<CMatrix> star_cholesky(const CMatrix& P0, const CMatrix& s) {
  const int n = static_cast<int>(P0.rows());
  CMatrix H = s * P0;
  H = 0.5 * (H + H.adjoint());
  CMatrix U = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double si = s(i, i).real();
    Complex acc = H(i, i);
    for (int k = 0; k < i; ++k)
      acc -= std::conj(U(k, i)) * s(k, k).real() * U(k, i);
    const double piv = acc.real() * si;
    if (!(piv > 0)) return std::nullopt;
    U(i, i) = std::sqrt(piv);
    for (int j = i + 1; j < n; ++j) {
      Complex a = H(i, j);
      for (int k = 0; k < i; ++k) a -= std::conj(U(k, i)) * s(k, k).real() * U(k, j);
      U(i, j) = si * a / U(i, i);
    }
  }
  return U;
}

struct NewtonIndexing {
  int N, n;
  int unknowns() const { return 2 * (N + 1) * n * n; }
  int residual_rows() const { return 2 * (N + 1) * n * n; }
  int gauge_rows() const { return n * n; }
  int rows() const { return residual_rows() + gauge_rows(); }
};

// Flatten modes 0..N of a loop into (re, im) pairs, followed by the Borel
// gauge rows evaluated on the constant term `c0` (zero rows keep the step's
// constant term upper triangular with real diagonal).
Eigen::VectorXd flatten_residual(const NewtonIndexing& ix, const MatrixLoop& r,
                                 const CMatrix& c0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ix.rows());
  int p = 0;
  for (int m = 0; m <= ix.N; ++m)
    for (int i = 0; i < ix.n; ++i)
      for (int j = 0; j < ix.n; ++j) {
        const Complex c = r.coeff(m)(i, j);
        v[p++] = c.real();
        v[p++] = c.imag();
      }
  for (int i = 0; i < ix.n; ++i) v[p++] = c0(i, i).imag();
  for (int i = 0; i < ix.n; ++i)
    for (int j = 0; j < i; ++j) {
      v[p++] = c0(i, j).real();
      v[p++] = c0(i, j).imag();
    }
  return v;
}

}  // namespace

IwasawaPair iwasawa_split(const MatrixLoop& g, const GroupModel& model, RealForm form,
                          const FactorOptions& opt) {
  const int n = g.size();
  const int N = g.degree();
  const CMatrix s = model.star_matrix(form);
  const CMatrix sinv = s.inverse();

  // P = g* g is star-Hermitian; V solves V* V = P with V a non-negative loop.
  MatrixLoop P = loop_multiply(tau_star(g, model, form), g);
  {
    MatrixLoop sym = tau_star(P, model, form);
    sym += P;
    sym *= 0.5;
    P = sym;
  }
  const double scale = std::max(1.0, P.wiener_norm());
  const double target = opt.newton_tol * scale;

  auto fail = [&](const std::string& msg) -> void {
    if (form == RealForm::indefinite)
      throw OutsideIwasawaCell("iwasawa_split: " + msg);
    throw NumericalBreakdown("iwasawa_split: " + msg);
  };

  // Initial guess: warm start if provided, otherwise the signature Cholesky
  // factor of the lambda-constant mode.
  MatrixLoop V(n, N, LoopKind::group);
  if (opt.warm_start && opt.warm_start->size() == n && opt.warm_start->degree() == N) {
    V = *opt.warm_start;
  } else {
    auto chol = star_cholesky(P.coeff(0), s);
    if (!chol) {
      fail("constant mode has incompatible signature, no factorization exists");
    }
    V.at(0) = *chol;
  }

  const NewtonIndexing ix{N, n};
  auto residual = [&](const MatrixLoop& v) {
    MatrixLoop r = loop_multiply(tau_star(v, model, form), v);
    r -= P;
    return r;
  };

  MatrixLoop R = residual(V);
  double rnorm = R.wiener_norm();
  IwasawaPair out;

  for (int iter = 0; iter < opt.max_newton_steps && rnorm > target; ++iter) {
    // Linearization at V: E(D) = tau_star(D) V + tau_star(V) D, assembled
    // column by column over the real coordinate basis of the plus window.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(ix.rows(), ix.unknowns());
    int col = 0;
    for (int m = 0; m <= N; ++m)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int part = 0; part < 2; ++part, ++col) {
            CMatrix d = CMatrix::Zero(n, n);
            d(i, j) = (part == 0) ? Complex(1, 0) : Complex(0, 1);
            const CMatrix dstar = s * d.adjoint() * sinv;
            MatrixLoop E(n, N);
            for (int k = m; k <= N; ++k) {
              const CMatrix& vk = V.at(k);
              if (is_zero_coeff(vk)) continue;
              E.at(k - m) += dstar * vk;
            }
            for (int k = 0; k <= m; ++k) {
              const CMatrix& vk = V.at(k);
              if (is_zero_coeff(vk)) continue;
              E.at(m - k) += s * vk.adjoint() * sinv * d;
            }
            const CMatrix c0 = (m == 0) ? d : CMatrix::Zero(n, n);
            J.col(col) = flatten_residual(ix, E, c0);
          }

    const Eigen::VectorXd b = flatten_residual(ix, R, CMatrix::Zero(n, n));

    auto apply_step = [&](const Eigen::VectorXd& step, MatrixLoop& cand) {
      cand = V;
      int p = 0;
      for (int m = 0; m <= N; ++m)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            cand.at(m)(i, j) += Complex(step[p], step[p + 1]);
            p += 2;
          }
    };

    auto line_search = [&](const Eigen::VectorXd& step, MatrixLoop& best,
                           double& best_norm) -> bool {
      double t = 1.0;
      for (int k = 0; k < 8; ++k, t *= 0.5) {
        MatrixLoop cand;
        apply_step(t * step, cand);
        const double cn = residual(cand).wiener_norm();
        if (cn < (1.0 - 0.25 * t) * rnorm) {
          best = cand;
          best_norm = cn;
          return true;
        }
      }
      return false;
    };

    // Gauss-Newton step via the normal equations; fall back to a rank-aware
    // QR solve when that stalls.
    Eigen::VectorXd step =
        (J.transpose() * J).ldlt().solve(-J.transpose() * b);
    MatrixLoop next;
    double next_norm = rnorm;
    bool ok = step.allFinite() && line_search(step, next, next_norm);
    if (!ok) {
      step = J.colPivHouseholderQr().solve(-b);
      ok = step.allFinite() && line_search(step, next, next_norm);
    }
    if (!ok) {
      fail("Newton iteration stalled at residual " + std::to_string(rnorm) +
           ", loop is outside the factorizable cell");
    }
    V = next;
    R = residual(V);
    rnorm = R.wiener_norm();
    out.newton_iterations = iter + 1;
  }

  if (!(rnorm <= target))
    fail("Newton iteration did not converge (residual " + std::to_string(rnorm) + ")");

  out.plus_part = V;
  out.factor_residual = rnorm;
  MatrixLoop vinv = loop_inverse(V);
  out.real_part = loop_multiply(g, vinv);
  out = gauge_normalize(std::move(out), model);
  out.reconstruction =
      loop_distance(loop_multiply(out.real_part, out.plus_part), g);
  out.realness = real_form_deviation(out.real_part, model, form);
  return out;
}

IwasawaPair gauge_normalize(IwasawaPair pair, const GroupModel& model) {
  const int n = pair.plus_part.size();
  const CMatrix c0 = pair.plus_part.at(0);
  CMatrix u = CMatrix::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = std::abs(c0(i, i));
    if (m < 1e-150)
      throw NumericalBreakdown(
          "gauge_normalize: constant term has zero diagonal entry, gauge is degenerate");
    u(i, i) = c0(i, i) / m;
  }
  (void)model;  // diagonal phases lie in every real form of the torus
  pair.plus_part = mul_const_left(u.inverse(), pair.plus_part);
  pair.real_part = mul_const_right(pair.real_part, u);
  return pair;
}

}  // namespace dpw
