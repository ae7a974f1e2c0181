#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dpw/basepoint.hpp"
#include "oracles.hpp"

using namespace dpw;

namespace {
const GroupModel kCompact = GroupModel::rank_one(RealForm::compact);
const GroupModel kIndef = GroupModel::rank_one(RealForm::indefinite);

PipelineOptions wide_options() {
  PipelineOptions opt;
  opt.degree = 12;
  return opt;
}

GridSpec test_grid() {
  GridSpec g;
  g.lo = Complex(-0.3, -0.3);
  g.hi = Complex(0.3, 0.3);
  g.nx = g.ny = 9;
  return g;
}

PotentialOneForm vacuum_eta() {
  PolyMatrix xi;
  xi.coeffs = {dpwtest::offdiag()};
  Domain d;
  d.lo = Complex(-0.3, -0.3);
  d.hi = Complex(0.3, 0.3);
  return PotentialOneForm::normalized(xi, Complex(0, 0), d);
}

const ExtendedFrameField& compact_vacuum() {
  static const ForwardResult r =
      forward_dpw(vacuum_eta(), test_grid(), RealForm::compact, kCompact, wide_options());
  return r.frame;
}

const ExtendedFrameField& indefinite_vacuum() {
  static const ForwardResult r =
      forward_dpw(vacuum_eta(), test_grid(), RealForm::indefinite, kIndef, wide_options());
  return r.frame;
}

CMatrix rotation(double a) {
  CMatrix r = CMatrix::Zero(2, 2);
  r(0, 0) = r(1, 1) = std::cos(a);
  r(0, 1) = std::sin(a);
  r(1, 0) = -std::sin(a);
  return r;
}

CMatrix boost(double a) {
  CMatrix b = CMatrix::Zero(2, 2);
  b(0, 0) = b(1, 1) = std::cosh(a);
  b(0, 1) = b(1, 0) = std::sinh(a);
  return b;
}
}  // namespace

TEST_CASE("conjugation moves validate and transport the frame") {
  const ExtendedFrameField& f0 = compact_vacuum();
  ConjugationMove move;
  move.z_source = Complex(0, 0);
  move.z_target = Complex(0.15, 0);  // grid node; F0 there is I at lambda = 1
  move.h = f0.frame_at(move.z_target).evaluate(Complex(1, 0)) * dpwtest::torus(M_PI / 5);

  const MoveValidation mv = validate_conjugation(move, f0);
  CHECK(mv.realness <= 1e-9);
  CHECK(mv.intertwine <= 1e-9);
  CHECK(mv.gauge_in_torus <= 1e-9);
  CHECK(mv.ok(1e-6));

  const ConjugateResult res = conjugate_transport(f0, move);
  CHECK(res.diag.get("target_identity_at_one") <= 1e-9);
  CHECK(res.diag.get("realness") <= 1e-7);
  CHECK(res.frame.basepoint == move.z_target);
  CHECK((res.model1.twist - kCompact.twist).norm() <= 1e-12);  // torus h fixes Q

  // the transported loops are plain constant conjugates (the gauge is I here)
  const Complex probe(0.075, -0.15);
  const MatrixLoop want = conjugate_const(move.h, f0.frame_at(probe));
  CHECK(loop_distance(res.frame.frame_at(probe), want) <= 1e-11);
  CHECK(check_twisted(res.frame.frame_at(probe), res.model1).max_violation <= 1e-9);

  // minus factors transport by the same conjugation
  const MatrixLoop m0 = birkhoff_split(f0.frame_at(probe), kCompact).minus;
  const MatrixLoop m1 = birkhoff_split(res.frame.frame_at(probe), res.model1).minus;
  CHECK(loop_distance(m1, conjugate_const(move.h, m0)) <= 1e-9);
}

TEST_CASE("conjugation rejects inadmissible moves") {
  const ExtendedFrameField& f0 = compact_vacuum();

  ConjugationMove bad_h;
  bad_h.z_source = Complex(0, 0);
  bad_h.z_target = Complex(0.15, 0);
  bad_h.h = CMatrix::Zero(2, 2);
  bad_h.h(0, 0) = 2.0;
  bad_h.h(1, 1) = 0.5;  // diagonal but not unitary: fails realness only
  CHECK(validate_conjugation(bad_h, f0).realness > 1.0);
  CHECK(validate_conjugation(bad_h, f0).intertwine <= 1e-9);
  CHECK_THROWS_AS(conjugate_transport(f0, bad_h), MoveInvalid);

  ConjugationMove bad_z;
  bad_z.z_source = Complex(0, 0);
  bad_z.z_target = Complex(0.15, 0.075);  // node, but the gauge leaves the torus
  bad_z.h = CMatrix::Identity(2, 2);
  CHECK(validate_conjugation(bad_z, f0).gauge_in_torus > 0.1);
  CHECK_THROWS_AS(conjugate_transport(f0, bad_z), MoveInvalid);
}

TEST_CASE("involution transport produces a commuting package") {
  ConjugationMove move;
  move.h = rotation(0.3);
  const InvolutionTransport t = involution_transport(move, kCompact);
  CHECK((t.twist1 - rotation(0.3) * kCompact.twist * rotation(0.3).inverse()).norm() <=
        1e-14);
  CHECK(t.sigma1_involutive <= 1e-13);
  CHECK(t.commutation <= 1e-13);

  ConjugationMove bmove;
  bmove.h = boost(0.3);
  const InvolutionTransport tb = involution_transport(bmove, kIndef);
  CHECK(tb.sigma1_involutive <= 1e-13);
  CHECK(tb.commutation <= 1e-13);
}

TEST_CASE("dressing ring construction is exact") {
  const ExtendedFrameField& f0 = compact_vacuum();
  const Complex z2(0.15, 0);
  const CMatrix k0 = dpwtest::torus(M_PI / 7);
  Diagnostics diag;
  const DressingMove move = compute_ring_g(f0, z2, k0, &diag);
  CHECK(diag.get("ring_inverse_residual") <= 1e-12);
  CHECK(diag.get("ring_realness") <= 1e-6);
  CHECK(diag.get("ring_twist") <= 1e-10);
  CHECK(diag.get("ring_birkhoff_reconstruction") <= 1e-9);
  CHECK(diag.get("cartan_intertwine") <= 1e-8);

  const MatrixLoop core = mul_const_right(f0.frame_at(z2), k0);
  CHECK(loop_distance(loop_multiply(move.ring_g, core), MatrixLoop::identity(2, 12)) <=
        1e-11);
  CHECK(loop_distance(loop_multiply(move.ring_minus, move.ring_plus), move.ring_g) <=
        1e-9);
}

TEST_CASE("dressing routes agree everywhere on the vacuum") {
  const ExtendedFrameField& f0 = compact_vacuum();
  const DressingMove move = compute_ring_g(f0, Complex(0.15, 0), dpwtest::torus(M_PI / 7));
  const DressedResult d = dressed_transport(f0, move);
  CHECK(d.diag.flagged.empty());
  CHECK(d.diag.get("route_agreement_fraction") == doctest::Approx(1.0));
  CHECK(d.diag.get("route_disagreement") <= 1e-8);
  CHECK(d.diag.get("target_identity") <= 1e-8);
  CHECK(d.diag.get("frame_target_identity") <= 1e-8);
  CHECK(d.f2_frame.basepoint == Complex(0.15, 0));
  CHECK(real_form_deviation(d.f2_frame.frame_at(Complex(0, 0.15)), kCompact,
                            RealForm::compact) <= 1e-6);
}

TEST_CASE("identity dressing move reproduces the compact dual in place") {
  const ExtendedFrameField& f0 = indefinite_vacuum();
  const DressingMove move = compute_ring_g(f0, Complex(0, 0), CMatrix::Identity(2, 2));
  CHECK(loop_distance(move.ring_g, MatrixLoop::identity(2, 12)) <= 1e-10);
  const DressedResult d = dressed_transport(f0, move);
  const DualFrameResult dual = dual_frame_transport(f0, d.f2_frame, move);
  CHECK(dual.diag.flagged.empty());
  CHECK(dual.diag.get("dual_pointwise_distance") <= 1e-10);
  CHECK(dual.diag.get("wplus_negative_mass") <= 1e-9);

  const GridSpec& g = f0.grid();
  double worst = 0, worst_w = 0;
  const MatrixLoop id = MatrixLoop::identity(2, 12);
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      REQUIRE(dual.f0_dual.ok(ix, iy));
      const MatrixLoop oracle = dpwtest::vacuum_frame(g.z(ix, iy), 8, RealForm::compact);
      worst = std::max(worst,
                       loop_distance(dual.f0_dual.at(ix, iy).truncated(8), oracle));
      worst_w = std::max(worst_w, loop_distance(dual.w_plus.at(ix, iy), id));
    }
  CHECK(worst <= 1e-9);
  CHECK(worst_w <= 1e-9);
}

TEST_CASE("dual frames after a genuine move stay holomorphically connected") {
  const ExtendedFrameField& f0 = indefinite_vacuum();
  const DressingMove move = compute_ring_g(f0, Complex(0.15, 0), dpwtest::torus(M_PI / 6));
  const DressedResult d = dressed_transport(f0, move);
  CHECK(d.diag.get("route_agreement_fraction") == doctest::Approx(1.0));
  const DualFrameResult dual = dual_frame_transport(f0, d.f2_frame, move);
  CHECK(dual.diag.flagged.empty());
  CHECK(dual.diag.get("wplus_negative_mass") <= 1e-9);
  CHECK(dual.diag.get("dual_split_residual") <= 1e-8);
  CHECK(dual.diag.get("dual_relation_residual") <= 1e-6);
}
