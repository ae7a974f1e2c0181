#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dpw/factorization.hpp"
#include "dpw/rng.hpp"
#include "oracles.hpp"

using namespace dpw;

namespace {
const GroupModel kCompact = GroupModel::rank_one(RealForm::compact);
const GroupModel kIndef = GroupModel::rank_one(RealForm::indefinite);

MatrixLoop indefinite_test_loop(SplitMix64& rng, int degree) {
  // real-form loop perturbed inside the plus subgroup stays in the open cell
  const MatrixLoop u = random_twisted_group_loop(rng, kIndef, degree, 3, 0.25, true);
  MatrixLoop a = random_twisted_algebra_loop(rng, kIndef, degree, 3, 0.2);
  a.zero_modes_below(0);
  return loop_multiply(u, loop_exp(a));
}
}  // namespace

TEST_CASE("commuting exponential splits analytically") {
  const CMatrix s = dpwtest::offdiag();
  const CMatrix am = 0.12 * s;
  const CMatrix bm = 0.08 * s;
  MatrixLoop alg(2, 8, LoopKind::algebra);
  alg.at(-1) = am;
  alg.at(1) = bm;
  const MatrixLoop g = loop_exp(alg);

  const MatrixLoop minus_exact = loop_exp(MatrixLoop::single(8, -1, am, LoopKind::algebra));
  const MatrixLoop plus_exact = loop_exp(MatrixLoop::single(8, 1, bm, LoopKind::algebra));

  const BirkhoffPair b = birkhoff_split(g, kCompact);
  CHECK(loop_distance(b.minus, minus_exact) <= 1e-10);
  CHECK(loop_distance(b.plus, plus_exact) <= 1e-10);
  CHECK(b.reconstruction <= 1e-11);
}

TEST_CASE("birkhoff factors have one-sided structure") {
  SplitMix64 rng{21};
  for (int i = 0; i < 3; ++i) {
    // spectrum well inside the window, so the windowed reconstruction
    // measurement is not dominated by the input's own truncation tail
    const MatrixLoop g = random_twisted_group_loop(rng, kCompact, 12, 3, 0.25);
    const BirkhoffPair b = birkhoff_split(g, kCompact);
    CHECK(b.reconstruction <= 1e-9);
    CHECK(b.minus.mass_above(0) == 0.0);
    CHECK(b.plus.mass_below(0) == 0.0);
    CHECK((b.minus.coeff(0) - CMatrix::Identity(2, 2)).norm() <= 1e-10);
    CHECK(check_twisted(b.minus, kCompact).max_violation <= 1e-9);
    CHECK(check_twisted(b.plus, kCompact).max_violation <= 1e-9);
  }
}

TEST_CASE("compact splitting produces unitary loops") {
  SplitMix64 rng{22};
  for (int i = 0; i < 3; ++i) {
    const MatrixLoop g = random_twisted_group_loop(rng, kCompact, 12, 3, 0.25);
    const IwasawaPair w = iwasawa_split(g, kCompact, RealForm::compact);
    CHECK(w.reconstruction <= 1e-9);
    CHECK(w.realness <= 1e-7);
    CHECK(w.plus_part.mass_below(0) == 0.0);
    // normalized constant term: upper triangular, positive diagonal
    const CMatrix c0 = w.plus_part.coeff(0);
    CHECK(std::abs(c0(1, 0)) <= 1e-10);
    CHECK(c0(0, 0).real() > 0);
    CHECK(c0(1, 1).real() > 0);
    CHECK(std::abs(c0(0, 0).imag()) <= 1e-10);
    CHECK(std::abs(c0(1, 1).imag()) <= 1e-10);
  }
}

TEST_CASE("indefinite splitting stays in the real form") {
  SplitMix64 rng{23};
  for (int i = 0; i < 2; ++i) {
    const MatrixLoop g = indefinite_test_loop(rng, 12);
    const IwasawaPair w = iwasawa_split(g, kIndef, RealForm::indefinite);
    CHECK(w.reconstruction <= 1e-9);
    CHECK(w.realness <= 1e-7);
    CHECK(real_form_deviation(w.real_part, kIndef, RealForm::indefinite) <= 1e-7);
  }
}

TEST_CASE("warm starts converge to the same factors") {
  SplitMix64 rng{24};
  const MatrixLoop g = random_twisted_group_loop(rng, kCompact, 8, 3, 0.3);
  const IwasawaPair cold = iwasawa_split(g, kCompact, RealForm::compact);
  FactorOptions opt;
  opt.warm_start = &cold.plus_part;
  const IwasawaPair warm = iwasawa_split(g, kCompact, RealForm::compact, opt);
  CHECK(loop_distance(cold.real_part, warm.real_part) <= 1e-9);
  CHECK(warm.newton_iterations <= cold.newton_iterations);
}

TEST_CASE("splitting of a real-form loop is trivial") {
  SplitMix64 rng{25};
  const MatrixLoop u = random_twisted_group_loop(rng, kCompact, 8, 3, 0.25, true);
  const IwasawaPair w = iwasawa_split(u, kCompact, RealForm::compact);
  // the plus factor must be (numerically) the identity up to the torus gauge
  CHECK(loop_distance(w.real_part, u) <= 1e-6);
  CHECK(loop_distance(w.plus_part, MatrixLoop::identity(2, 8)) <= 1e-6);
}

TEST_CASE("boundary loops are rejected deterministically") {
  MatrixLoop g1 = MatrixLoop::identity(2, 8);
  g1.at(-1)(0, 1) = 1.5;  // Gram constant term diag(1, 1 - 2.25)
  for (int i = 0; i < 3; ++i)
    CHECK_THROWS_AS(iwasawa_split(g1, kIndef, RealForm::indefinite), OutsideIwasawaCell);

  MatrixLoop g2(2, 8, LoopKind::group);
  g2.at(1)(0, 1) = 1;
  g2.at(-1)(1, 0) = -1;  // invertible on the circle, no minus*plus split
  for (int i = 0; i < 3; ++i)
    CHECK_THROWS_AS(birkhoff_split(g2, kCompact), OutsideBigCell);
}

TEST_CASE("compact splitting of the vacuum matches the closed form") {
  const Complex z(0.2, 0.1);
  const int work = 12, out = 8;
  const MatrixLoop fm = dpwtest::vacuum_minus(z, work);
  const IwasawaPair w = iwasawa_split(fm, kCompact, RealForm::compact);
  const MatrixLoop frame = w.real_part.truncated(out);
  const MatrixLoop oracle = dpwtest::vacuum_frame(z, out, RealForm::compact);
  CHECK(loop_distance(frame, oracle) <= 1e-10);
}
