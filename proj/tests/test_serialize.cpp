#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "dpw/rng.hpp"
#include "dpw/serialize.hpp"
#include "oracles.hpp"

using namespace dpw;

namespace {
const GroupModel kCompact = GroupModel::rank_one(RealForm::compact);

std::string fresh_dir(const std::string& tag) {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / ("dpwkit-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}
}  // namespace

TEST_CASE("scalars and matrices round trip exactly") {
  const Complex z(0.123456789012345, -3.14159);
  CHECK(complex_from_json(complex_to_json(z), "t") == z);

  CMatrix m(2, 2);
  m << Complex(1, 2), Complex(-0.25, 0), Complex(0, 1e-12), Complex(7, -7);
  CHECK((matrix_from_json(matrix_to_json(m), "t") - m).norm() == 0.0);
}

TEST_CASE("loops round trip exactly, including through text") {
  SplitMix64 rng{31};
  const MatrixLoop g = random_twisted_group_loop(rng, kCompact, 6, 3, 0.3);
  CHECK(loop_distance(loop_from_json(loop_to_json(g)), g) == 0.0);

  const std::string text = loop_to_json(g).dump();
  CHECK(loop_distance(loop_from_json(Json::parse(text)), g) == 0.0);
  CHECK(loop_from_json(loop_to_json(g)).kind() == LoopKind::group);
}

TEST_CASE("grid and config round trips") {
  RunConfig c;
  c.truncation = 6;
  c.grid.lo = Complex(-0.4, -0.3);
  c.grid.hi = Complex(0.4, 0.3);
  c.grid.nx = 13;
  c.grid.ny = 11;
  c.form = RealForm::indefinite;
  c.seed = 987654321;
  c.lambda_samples = {Complex(1, 0), Complex(0, -1)};
  const RunConfig back = config_from_json(config_to_json(c));
  CHECK(back.truncation == 6);
  CHECK(back.grid.nx == 13);
  CHECK(back.grid.ny == 11);
  CHECK(back.grid.lo == c.grid.lo);
  CHECK(back.form == RealForm::indefinite);
  CHECK(back.seed == 987654321);
  REQUIRE(back.lambda_samples.size() == 2);
  CHECK(back.lambda_samples[1] == Complex(0, -1));
  CHECK(config_to_json(back).dump() == config_to_json(c).dump());
}

TEST_CASE("potential round trip preserves evaluation") {
  PotentialOneForm eta;
  eta.n = 2;
  PotentialTerm t;
  t.mode = -1;
  CMatrix e01 = CMatrix::Zero(2, 2);
  e01(0, 1) = 1;
  t.fn.num.coeffs = {e01, 0.5 * e01};
  t.fn.den = {Complex(1, 0), Complex(-2, 0)};
  eta.terms = {t};
  eta.basepoint = Complex(0.05, 0);
  eta.poles = {Complex(0.5, 0)};
  const PotentialOneForm back = potential_from_json(potential_to_json(eta));
  CHECK(back.terms.size() == 1);
  CHECK(back.poles.size() == 1);
  const Complex z(0.21, -0.07);
  CHECK(loop_distance(back.eval_loop(z, 4), eta.eval_loop(z, 4)) == 0.0);
  CHECK(back.basepoint == eta.basepoint);
}

TEST_CASE("move specs round trip") {
  MoveSpec conj;
  conj.type = "conjugation";
  conj.z_target = Complex(0.2, 0);
  conj.h = dpwtest::torus(0.4);
  const MoveSpec cback = move_from_json(move_to_json(conj));
  CHECK(cback.type == "conjugation");
  CHECK(cback.z_target == conj.z_target);
  CHECK((cback.h - conj.h).norm() == 0.0);
  CHECK_FALSE(cback.has_gauge);

  SplitMix64 rng{32};
  MoveSpec dress;
  dress.type = "dressing";
  dress.z_target = Complex(0.1, 0.1);
  dress.gauge = dpwtest::torus(1.0);
  dress.has_gauge = true;
  dress.ring = random_twisted_group_loop(rng, kCompact, 4, 2, 0.2);
  const MoveSpec dback = move_from_json(move_to_json(dress));
  CHECK(dback.type == "dressing");
  CHECK(dback.has_gauge);
  REQUIRE(dback.ring.has_value());
  CHECK(loop_distance(*dback.ring, *dress.ring) == 0.0);
}

TEST_CASE("frame dumps round trip with flagged points") {
  SplitMix64 rng{33};
  ExtendedFrameField f;
  f.field.grid.lo = Complex(-0.1, -0.1);
  f.field.grid.hi = Complex(0.1, 0.1);
  f.field.grid.nx = f.field.grid.ny = 3;
  const GridSpec& g = f.field.grid;
  f.field.values.resize(static_cast<size_t>(g.points()));
  f.field.valid.assign(static_cast<size_t>(g.points()), 1);
  for (auto& v : f.field.values) v = random_twisted_group_loop(rng, kCompact, 4, 2, 0.3);
  f.field.valid[static_cast<size_t>(g.index(1, 2))] = 0;
  f.basepoint = Complex(0, 0);
  f.form = RealForm::compact;
  f.model = kCompact;

  Diagnostics diag;
  diag.maximize("iwasawa_reconstruction", 3.25e-11);
  diag.flagged.push_back({1, 2, "outside_iwasawa_cell", "probe"});

  const std::string dir = fresh_dir("serialize");
  write_frame_dump(dir, "frame", f, diag);
  const ExtendedFrameField back = read_frame_dump(dir, "frame");
  CHECK(back.form == RealForm::compact);
  CHECK(back.basepoint == f.basepoint);
  CHECK(back.grid().nx == 3);
  for (int iy = 0; iy < 3; ++iy)
    for (int ix = 0; ix < 3; ++ix) {
      CHECK(back.field.ok(ix, iy) == f.field.ok(ix, iy));
      if (f.field.ok(ix, iy))
        CHECK(loop_distance(back.field.at(ix, iy), f.field.at(ix, iy)) <= 1e-15);
    }
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "frame.flagged.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed input is rejected with schema errors") {
  CHECK_THROWS_AS(complex_from_json(Json("nope"), "t"), SchemaError);
  CHECK_THROWS_AS(loop_from_json(Json::object()), SchemaError);
  CHECK_THROWS_AS(load_json_file("/nonexistent/definitely/missing.json"), SchemaError);
  Json bad_move = {{"type", "teleport"}};
  CHECK_THROWS_AS(move_from_json(bad_move), SchemaError);
}
