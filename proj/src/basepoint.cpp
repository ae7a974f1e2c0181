#include "dpw/basepoint.hpp"

#include <algorithm>
#include <cmath>

namespace dpw {

namespace {

CMatrix cartan_embedding_at_one(const ExtendedFrameField& f, Complex z) {
  const CMatrix m = f.frame_at(z).evaluate(Complex(1, 0));
  return m * f.model.twist * m.inverse();
}

}  // namespace

MoveValidation validate_conjugation(const ConjugationMove& move,
                                    const ExtendedFrameField& f0) {
  const GroupModel& model = f0.model;
  MoveValidation v;
  v.realness = (model.tau_group(move.h, f0.form) - move.h).norm();
  const CMatrix p0 = cartan_embedding_at_one(f0, move.z_source);
  const CMatrix p1 = cartan_embedding_at_one(f0, move.z_target);
  v.intertwine = (move.h * p0 * move.h.inverse() - p1).norm();
  const CMatrix gauge = f0.frame_at(move.z_target).evaluate(Complex(1, 0)).inverse();
  v.gauge_in_torus = std::max(model.k_group_residual(gauge),
                              model.real_form_residual(gauge, f0.form));
  return v;
}

ConjugateResult conjugate_transport(const ExtendedFrameField& f0,
                                    const ConjugationMove& move, double tol) {
  const GroupModel& model = f0.model;
  const MoveValidation v = validate_conjugation(move, f0);
  if (v.realness > tol)
    throw MoveInvalid("conjugate_transport: h is not in the real form (residual " +
                      std::to_string(v.realness) + ")");
  if (v.intertwine > tol)
    throw MoveInvalid(
        "conjugate_transport: h does not map the harmonic map value at the "
        "source to the target (residual " +
        std::to_string(v.intertwine) + ")");
  if (v.gauge_in_torus > tol)
    throw MoveInvalid(
        "conjugate_transport: required gauge at the target is not in the "
        "torus (residual " +
        std::to_string(v.gauge_in_torus) +
        "); the frame value there does not normalise by a torus element");

  ConjugateResult out;
  out.gauge = f0.frame_at(move.z_target).evaluate(Complex(1, 0)).inverse();
  const CMatrix hinv = move.h.inverse();

  out.model1 = model;
  out.model1.twist = move.h * model.twist * hinv;
  out.model1.cartan = move.h * model.cartan * move.h.adjoint();

  out.frame.basepoint = move.z_target;
  out.frame.form = f0.form;
  out.frame.model = out.model1;
  out.frame.field = f0.field;
  const GridSpec& grid = f0.grid();
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (!f0.field.ok(ix, iy)) continue;
      MatrixLoop g = mul_const_right(f0.field.at(ix, iy), out.gauge);
      out.frame.field.at(ix, iy) = conjugate_const(move.h, g);
      out.diag.maximize(
          "twist1_violation",
          check_twisted(out.frame.field.at(ix, iy), out.model1).max_violation);
    }

  // Normalisation audits at the new base point: exact at lambda = 1; the
  // deviation over the whole circle is reported, not enforced, because a
  // lambda-independent h cannot remove it.
  int tx = 0, ty = 0;
  if (grid.find(move.z_target, tx, ty) && out.frame.field.ok(tx, ty)) {
    const MatrixLoop& ft = out.frame.field.at(tx, ty);
    out.diag.maximize("target_identity_at_one",
                      (ft.evaluate(Complex(1, 0)) -
                       CMatrix::Identity(model.n, model.n))
                          .norm());
    out.diag.maximize(
        "target_full_lambda_deviation",
        loop_distance(ft, MatrixLoop::identity(model.n, ft.degree())));
    out.diag.maximize("realness", real_form_deviation(ft, model, f0.form));
  }
  return out;
}

InvolutionTransport involution_transport(const ConjugationMove& move,
                                         const GroupModel& model) {
  InvolutionTransport out;
  out.twist1 = move.h * model.twist * move.h.inverse();
  out.cartan1 = move.h * model.cartan * move.h.adjoint();
  GroupModel m1 = model;
  m1.twist = out.twist1;
  m1.cartan = out.cartan1;
  const GroupModel::Validation v = m1.validate();
  out.sigma1_involutive = v.sigma_involutive;
  out.commutation = v.pairwise_commutation;
  return out;
}

DressingMove compute_ring_g(const ExtendedFrameField& f0, Complex z2,
                            const CMatrix& gauge, Diagnostics* diag) {
  const GroupModel& model = f0.model;
  const RealForm form = f0.form;
  const double torus_res = std::max(model.k_group_residual(gauge),
                                    model.real_form_residual(gauge, form));
  if (torus_res > 1e-8)
    throw MoveInvalid("compute_ring_g: gauge constant is not in the real torus "
                      "(residual " +
                      std::to_string(torus_res) + ")");

  const MatrixLoop& f_at_target = f0.frame_at(z2);
  const MatrixLoop core = mul_const_right(f_at_target, gauge);

  const double realness = real_form_deviation(core, model, form);
  if (realness > 1e-6)
    throw MoveInvalid("compute_ring_g: frame at the target is not in the real "
                      "form (deviation " +
                      std::to_string(realness) + ")");

  DressingMove move;
  move.z_source = f0.basepoint;
  move.z_target = z2;
  move.gauge = gauge;
  // Inverse of a real-form loop via the star anti-homomorphism; exact at the
  // coefficient level, so the ring loop satisfies ring_g^{-1} = F0(z2) k0 with
  // no solver noise beyond the frame's own real-form deviation.
  move.ring_g = tau_star(core, model, form);

  const int n = core.size();
  const int N = core.degree();
  const double inv_res = std::max(
      loop_distance(loop_multiply(move.ring_g, core), MatrixLoop::identity(n, N)),
      loop_distance(loop_multiply(core, move.ring_g), MatrixLoop::identity(n, N)));

  BirkhoffPair bp = birkhoff_split(move.ring_g, model);
  move.ring_minus = bp.minus;
  move.ring_plus = bp.plus;

  if (diag) {
    diag->maximize("ring_inverse_residual", inv_res);
    diag->maximize("ring_realness", realness);
    diag->maximize("ring_twist", check_twisted(move.ring_g, model).max_violation);
    diag->maximize("ring_birkhoff_reconstruction", bp.reconstruction);
    // Intertwining of the harmonic map values at lambda = 1: conjugation by
    // ring_g(1)^{-1} carries the map value at the source to the target.
    int bx = 0, by = 0;
    if (f0.grid().find(f0.basepoint, bx, by) && f0.field.ok(bx, by)) {
      const CMatrix g1 = move.ring_g.evaluate(Complex(1, 0));
      const CMatrix p0 = cartan_embedding_at_one(f0, f0.basepoint);
      const CMatrix p2 = cartan_embedding_at_one(f0, z2);
      diag->maximize("cartan_intertwine",
                     (g1.inverse() * p0 * g1 - p2).norm());
      diag->maximize("cartan_intertwine_left", (g1 * p0 * g1.inverse() - p2).norm());
    }
  }
  return move;
}

namespace {

// Dressing sandwich at padded degree: g_+ F_- g_+^{-1} computed without
// in-window truncation loss, split, and re-truncated.  `g_plus_inv_padded`
// must be the window inverse of g_plus at degree `padded`.
MatrixLoop dress_padded(const MatrixLoop& f_minus, const MatrixLoop& g_plus,
                        const MatrixLoop& g_plus_inv_padded, int padded,
                        const GroupModel& model) {
  const MatrixLoop t1 = loop_multiply_full(g_plus, f_minus);
  MatrixLoop sandwich = loop_multiply_full(t1, g_plus_inv_padded).truncated(padded);
  BirkhoffPair bp = birkhoff_split(sandwich, model);
  return bp.minus.truncated(std::max(f_minus.degree(), g_plus.degree()));
}

}  // namespace

MatrixLoop dress(const MatrixLoop& f_minus, const MatrixLoop& g_plus,
                 const GroupModel& model) {
  const int N = std::max(f_minus.degree(), g_plus.degree());
  const int padded = 2 * N + 2;
  const MatrixLoop gp_inv = loop_inverse(g_plus.truncated(padded));
  return dress_padded(f_minus, g_plus, gp_inv, padded, model);
}

DressedResult dressed_transport(const ExtendedFrameField& f0, const DressingMove& move) {
  const GroupModel& model = f0.model;
  const GridSpec& grid = f0.grid();
  if (f0.field.values.empty())
    throw std::invalid_argument("dressed_transport: empty frame field");
  const int n = f0.field.values.front().size();
  const int N = f0.field.values.front().degree();
  const int padded = 2 * N + 2;
  const MatrixLoop gp_inv = loop_inverse(move.ring_plus.truncated(padded));

  DressedResult out;
  out.f2_minus = LoopField::constant(grid, MatrixLoop::identity(n, N));
  out.f2_minus_direct = LoopField::constant(grid, MatrixLoop::identity(n, N));
  out.f2_frame.basepoint = move.z_target;
  out.f2_frame.form = f0.form;
  out.f2_frame.model = model;
  out.f2_frame.field = LoopField::constant(grid, MatrixLoop::identity(n, N));

  int agree = 0, valid = 0;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int idx = grid.index(ix, iy);
      if (!f0.field.ok(ix, iy)) {
        out.f2_minus.valid[static_cast<size_t>(idx)] = 0;
        out.f2_minus_direct.valid[static_cast<size_t>(idx)] = 0;
        out.f2_frame.field.valid[static_cast<size_t>(idx)] = 0;
        continue;
      }
      const MatrixLoop& F0z = f0.field.at(ix, iy);
      // Transported full frame F2 = ring_g F0 k0, exact at the new base point.
      const MatrixLoop big = loop_multiply_full(move.ring_g, F0z);
      double tail = 0;
      out.f2_frame.field.values[static_cast<size_t>(idx)] =
          mul_const_right(big, move.gauge).truncated(N, &tail);
      out.diag.maximize("frame_truncation_tail", tail);

      try {
        // Route A: dressing-formula transport of the minus factor.
        BirkhoffPair b0 = birkhoff_split(F0z, model);
        const MatrixLoop dressed =
            dress_padded(b0.minus, move.ring_plus, gp_inv, padded, model);
        out.f2_minus.values[static_cast<size_t>(idx)] =
            loop_multiply(move.ring_minus, dressed);

        // Route B: Birkhoff split of the transported frame itself.
        BirkhoffPair b2 = birkhoff_split(big.truncated(padded), model);
        out.f2_minus_direct.values[static_cast<size_t>(idx)] =
            b2.minus.truncated(N);

        const double d = loop_distance(out.f2_minus.values[static_cast<size_t>(idx)],
                                       out.f2_minus_direct.values[static_cast<size_t>(idx)]);
        out.diag.maximize("route_disagreement", d);
        ++valid;
        if (d <= kPipelineTol) ++agree;
      } catch (const Error& e) {
        out.f2_minus.valid[static_cast<size_t>(idx)] = 0;
        out.f2_minus_direct.valid[static_cast<size_t>(idx)] = 0;
        out.diag.flagged.push_back({ix, iy, e.kind(), e.what()});
      }
    }
  out.diag.values["route_agreement_fraction"] =
      (valid > 0) ? static_cast<double>(agree) / valid : 0.0;

  // The transported minus frame is normalized at the new base point.
  int tx = 0, ty = 0;
  if (grid.find(move.z_target, tx, ty) && out.f2_minus.ok(tx, ty)) {
    out.diag.maximize("target_identity",
                      loop_distance(out.f2_minus.at(tx, ty),
                                    MatrixLoop::identity(n, N)));
    out.diag.maximize("frame_target_identity",
                      loop_distance(out.f2_frame.field.at(tx, ty),
                                    MatrixLoop::identity(n, N)));
  }
  return out;
}

DualFrameResult dual_frame_transport(const ExtendedFrameField& f0,
                                     const ExtendedFrameField& f2,
                                     const DressingMove& move) {
  const GroupModel& model = f0.model;
  const GridSpec& grid = f0.grid();
  if (f2.grid().points() != grid.points())
    throw std::invalid_argument("dual_frame_transport: grid mismatch");
  const int n = f0.field.values.front().size();
  const int N = f0.field.values.front().degree();

  DualFrameResult out;
  out.f0_dual = LoopField::constant(grid, MatrixLoop::identity(n, N));
  out.f2_dual = LoopField::constant(grid, MatrixLoop::identity(n, N));
  out.w_plus = LoopField::constant(grid, MatrixLoop::identity(n, N));

  MatrixLoop warm0, warm2;
  bool have_warm = false;
  for (int iy = 0; iy < grid.ny; ++iy) {
    have_warm = false;
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int idx = grid.index(ix, iy);
      if (!f0.field.ok(ix, iy) || !f2.field.ok(ix, iy)) {
        out.f0_dual.valid[static_cast<size_t>(idx)] = 0;
        out.f2_dual.valid[static_cast<size_t>(idx)] = 0;
        out.w_plus.valid[static_cast<size_t>(idx)] = 0;
        continue;
      }
      try {
        FactorOptions fo;
        fo.warm_start = have_warm ? &warm0 : nullptr;
        IwasawaPair s0 =
            iwasawa_split(f0.field.at(ix, iy), model, RealForm::compact, fo);
        fo.warm_start = have_warm ? &warm2 : nullptr;
        IwasawaPair s2 =
            iwasawa_split(f2.field.at(ix, iy), model, RealForm::compact, fo);
        warm0 = s0.plus_part;
        warm2 = s2.plus_part;
        have_warm = true;

        out.f0_dual.values[static_cast<size_t>(idx)] = s0.real_part;
        out.f2_dual.values[static_cast<size_t>(idx)] = s2.real_part;

        // W_+ = V0_+ k0 V2_+^{-1} connects the dual frames:
        // F2_U = ring_g F0_U W_+.  Products of plus loops never produce
        // negative modes, so the structure audit below measures solver noise
        // only.
        double tail = 0;
        const MatrixLoop w =
            loop_multiply_full(mul_const_right(s0.plus_part, move.gauge),
                               loop_inverse(s2.plus_part))
                .truncated(N, &tail);
        out.w_plus.values[static_cast<size_t>(idx)] = w;
        out.diag.maximize("wplus_negative_mass", w.mass_below(0));
        out.diag.maximize("wplus_truncation_tail", tail);
        out.diag.maximize("dual_split_residual",
                          std::max(s0.reconstruction, s2.reconstruction));

        // Defining relation residual (diagnostic; carries the truncation tail
        // of the full-window products).
        const MatrixLoop rhs = loop_multiply(
            loop_multiply(move.ring_g, out.f0_dual.values[static_cast<size_t>(idx)]), w);
        out.diag.maximize(
            "dual_relation_residual",
            loop_distance(out.f2_dual.values[static_cast<size_t>(idx)], rhs));
        out.diag.maximize(
            "dual_pointwise_distance",
            loop_distance(out.f0_dual.values[static_cast<size_t>(idx)],
                          out.f2_dual.values[static_cast<size_t>(idx)]));
      } catch (const Error& e) {
        out.f0_dual.valid[static_cast<size_t>(idx)] = 0;
        out.f2_dual.valid[static_cast<size_t>(idx)] = 0;
        out.w_plus.valid[static_cast<size_t>(idx)] = 0;
        out.diag.flagged.push_back({ix, iy, e.kind(), e.what()});
        have_warm = false;
      }
    }
  }
  return out;
}

}  // namespace dpw
