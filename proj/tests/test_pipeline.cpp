#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dpw/pipeline.hpp"
#include "oracles.hpp"

using namespace dpw;

namespace {
const GroupModel kCompact = GroupModel::rank_one(RealForm::compact);
const GroupModel kIndef = GroupModel::rank_one(RealForm::indefinite);

CMatrix e01() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}
CMatrix e10() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(1, 0) = 1;
  return m;
}

Domain rect(double r) {
  Domain d;
  d.lo = Complex(-r, -r);
  d.hi = Complex(r, r);
  return d;
}

GridSpec grid(double r, int n) {
  GridSpec g;
  g.lo = Complex(-r, -r);
  g.hi = Complex(r, r);
  g.nx = g.ny = n;
  return g;
}

PotentialOneForm vacuum_eta(double r) {
  PolyMatrix xi;
  xi.coeffs = {dpwtest::offdiag()};
  return PotentialOneForm::normalized(xi, Complex(0, 0), rect(r));
}

ExtendedFrameField vacuum_frames(const GridSpec& g, int degree, RealForm form) {
  ExtendedFrameField f;
  f.field = LoopField::constant(g, MatrixLoop::identity(2, degree));
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix)
      f.field.at(ix, iy) = dpwtest::vacuum_frame(g.z(ix, iy), degree, form);
  f.basepoint = Complex(0, 0);
  f.form = form;
  f.model = GroupModel::rank_one(form);
  return f;
}
}  // namespace

TEST_CASE("zero potential yields constant identity frames") {
  PolyMatrix xi;
  xi.coeffs = {CMatrix::Zero(2, 2)};
  const PotentialOneForm eta = PotentialOneForm::normalized(xi, Complex(0, 0), rect(0.3));
  const ForwardResult r = forward_dpw(eta, grid(0.3, 5), RealForm::compact, kCompact);
  CHECK(r.diag.flagged.empty());
  const MatrixLoop id = MatrixLoop::identity(2, 8);
  for (int iy = 0; iy < 5; ++iy)
    for (int ix = 0; ix < 5; ++ix) {
      CHECK(loop_distance(r.frame.field.at(ix, iy), id) <= 1e-12);
      CHECK(loop_distance(r.plus.at(ix, iy), id) <= 1e-12);
    }
}

TEST_CASE("forward pipeline reproduces the vacuum closed form") {
  PipelineOptions opt;
  opt.degree = 12;  // working window wider than the comparison window
  const GridSpec g = grid(0.3, 9);
  for (RealForm form : {RealForm::compact, RealForm::indefinite}) {
    const GroupModel& m = (form == RealForm::compact) ? kCompact : kIndef;
    const ForwardResult r = forward_dpw(vacuum_eta(0.3), g, form, m);
    const ForwardResult rw = forward_dpw(vacuum_eta(0.3), g, form, m, opt);
    CHECK(rw.diag.flagged.empty());
    double worst = 0, worst_narrow = 0;
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const MatrixLoop oracle = dpwtest::vacuum_frame(g.z(ix, iy), 8, form);
        worst = std::max(worst,
                         loop_distance(rw.frame.field.at(ix, iy).truncated(8), oracle));
        worst_narrow =
            std::max(worst_narrow, loop_distance(r.frame.field.at(ix, iy), oracle));
      }
    CHECK(worst <= 1e-10);
    // without guard modes the window-truncation plateau dominates
    CHECK(worst_narrow <= 1e-6);
    CHECK(rw.diag.get("basepoint_identity") <= 1e-11);
    CHECK(rw.diag.get("frame_realness") <= 1e-8);
    CHECK(rw.diag.get("frame_twist") <= 1e-10);
  }
}

TEST_CASE("backward pipeline recovers the vacuum potential from exact frames") {
  const GridSpec g = grid(0.3, 11);
  const ExtendedFrameField f = vacuum_frames(g, 12, RealForm::compact);
  PipelineOptions opt;
  opt.degree = 12;
  const BackwardResult b = backward_dpw(f, opt);
  CHECK(b.diag.flagged.empty());
  double worst = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      REQUIRE(b.xi.ok(ix, iy));
      worst = std::max(worst, (b.xi.at(ix, iy) - dpwtest::offdiag()).norm());
    }
  CHECK(worst <= 1e-8);
  CHECK(b.diag.get("mode_purity") <= 1e-8);
  CHECK(b.diag.get("dzbar_mass") <= 1e-8);
  CHECK(b.diag.get("nonneg_mode_mass") <= 1e-8);
  CHECK(b.diag.get("p_valued_residual") <= 1e-8);
  CHECK(b.diag.get("basepoint_identity") <= 1e-10);
  // the Birkhoff minus factor at a generic node matches exp(z lambda^{-1} A)
  const Complex z = g.z(8, 3);
  CHECK(loop_distance(b.holomorphic.at(8, 3), dpwtest::vacuum_minus(z, 12)) <= 1e-9);
}

TEST_CASE("forward then backward returns the potential samples") {
  PolyMatrix xi;
  xi.coeffs = {e01() + e10(), CMatrix::Zero(2, 2), e01()};  // (e01+e10) + z^2 e01
  const PotentialOneForm eta = PotentialOneForm::normalized(xi, Complex(0, 0), rect(0.3));
  PipelineOptions opt;
  opt.degree = 12;
  const GridSpec g = grid(0.3, 11);
  const ForwardResult fw = forward_dpw(eta, g, RealForm::compact, kCompact, opt);
  REQUIRE(fw.diag.flagged.empty());
  const BackwardResult b = backward_dpw(fw.frame, opt);
  REQUIRE(b.diag.flagged.empty());
  double worst = 0;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      REQUIRE(b.xi.ok(ix, iy));
      worst = std::max(worst, (b.xi.at(ix, iy) - xi.eval(g.z(ix, iy))).norm());
    }
  CHECK(worst <= 1e-7);
}

TEST_CASE("associated family consists of involutions through the base point") {
  const GridSpec g = grid(0.3, 7);
  const ExtendedFrameField f = vacuum_frames(g, 10, RealForm::compact);
  const std::vector<Complex> lambdas = {Complex(1, 0), Complex(0, 1), Complex(-1, 0)};
  const AssociatedFamilySample fam = associated_family(f, lambdas);
  REQUIRE(fam.maps.size() == 3);
  CHECK(fam.diag.get("spectral_residual") <= 1e-10);
  CHECK(fam.diag.get("trace_residual") <= 1e-10);
  const CMatrix q = kCompact.twist;
  for (size_t il = 0; il < fam.maps.size(); ++il)
    for (int iy = 0; iy < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix) {
        const CMatrix p = fam.maps[il].at(ix, iy);
        CHECK((p * p - CMatrix::Identity(2, 2)).norm() <= 1e-9);
        CHECK((p - p.adjoint()).norm() <= 1e-9);  // unitary frames: Hermitian P
      }
  // at the base point every member passes through Q itself
  int bx = 0, by = 0;
  REQUIRE(g.find(Complex(0, 0), bx, by));
  for (size_t il = 0; il < fam.maps.size(); ++il)
    CHECK((fam.maps[il].at(bx, by) - q).norm() <= 1e-11);
}
