#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpw/cli_app.hpp"
#include "dpw/serialize.hpp"
#include "oracles.hpp"

using namespace dpw;
namespace fs = std::filesystem;

namespace {

struct CoutCapture {
  std::stringstream ss;
  std::streambuf* old;
  CoutCapture() : old(std::cout.rdbuf(ss.rdbuf())) {}
  ~CoutCapture() { std::cout.rdbuf(old); }
  std::string text() const { return ss.str(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One scratch tree shared by the cases; recreated per binary run.
const fs::path& base_dir() {
  static const fs::path p = [] {
    fs::path d = fs::temp_directory_path() / "dpwkit-cli-test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string write_config(const std::string& name, RealForm form) {
  RunConfig cfg;
  cfg.truncation = 8;
  cfg.grid.lo = Complex(-0.25, -0.25);
  cfg.grid.hi = Complex(0.25, 0.25);
  // 11 nodes per axis: enough interior room for the widened one-sided
  // derivative stencils, so the backward audit is not resolution-limited.
  cfg.grid.nx = cfg.grid.ny = 11;
  cfg.form = form;
  const fs::path p = base_dir() / name;
  write_json_file(p.string(), config_to_json(cfg));
  return p.string();
}

std::string write_vacuum_potential() {
  PolyMatrix xi;
  xi.coeffs = {dpwtest::offdiag()};
  Domain dom;
  dom.lo = Complex(-0.3, -0.3);
  dom.hi = Complex(0.3, 0.3);
  const PotentialOneForm eta = PotentialOneForm::normalized(xi, Complex(0, 0), dom);
  const fs::path p = base_dir() / "potential.json";
  write_json_file(p.string(), potential_to_json(eta));
  return p.string();
}

std::string out_dir(const std::string& name) {
  return (base_dir() / name).string();
}

int run(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
  CoutCapture cap;
  const int rc = run_cli(args);
  if (stdout_text) *stdout_text = cap.text();
  return rc;
}

// Runs the forward command once per binary and reuses the dump.
const std::string& forward_out(RealForm form) {
  static std::string compact_out, indef_out;
  std::string& slot = (form == RealForm::compact) ? compact_out : indef_out;
  if (slot.empty()) {
    const bool compact = form == RealForm::compact;
    slot = out_dir(compact ? "out_fwd" : "out_fwd_ind");
    const std::string cfg =
        write_config(compact ? "config.json" : "config_ind.json", form);
    REQUIRE(run({"forward", "--config", cfg, "--out", slot,
                 write_vacuum_potential()}) == 0);
  }
  return slot;
}

Json error_of(const std::string& text) {
  const Json j = Json::parse(text);
  REQUIRE(j.contains("error"));
  return j["error"];
}

}  // namespace

TEST_CASE("forward writes a dump matching the closed form") {
  const std::string out = forward_out(RealForm::compact);
  CHECK(fs::exists(fs::path(out) / "frame.meta.json"));
  CHECK(fs::exists(fs::path(out) / "frame.csv"));
  CHECK(fs::exists(fs::path(out) / "family.csv"));

  const ExtendedFrameField f = read_frame_dump(out, "frame");
  CHECK(f.form == RealForm::compact);
  CHECK(f.field.valid_count() == 121);
  double worst = 0;
  for (int iy = 0; iy < 11; ++iy)
    for (int ix = 0; ix < 11; ++ix) {
      const Complex z = f.grid().z(ix, iy);
      worst = std::max(worst, loop_distance(f.field.at(ix, iy),
                                            dpwtest::vacuum_frame(z, 8, f.form)));
    }
  CHECK(worst <= 1e-8);
}

TEST_CASE("grid and lambda overrides reach the pipeline") {
  PolyMatrix xi;
  xi.coeffs = {CMatrix::Zero(2, 2)};
  Domain dom;
  dom.lo = Complex(-0.3, -0.3);
  dom.hi = Complex(0.3, 0.3);
  const fs::path pot = base_dir() / "potential_zero.json";
  write_json_file(pot.string(),
                  potential_to_json(PotentialOneForm::normalized(xi, Complex(0, 0), dom)));
  const std::string out = out_dir("out_zero");
  REQUIRE(run({"forward", "--config", write_config("config.json", RealForm::compact),
               "--grid", "3,3", "--lambda-samples", "1,0", "--lambda-samples", "0,1",
               "--out", out, pot.string()}) == 0);
  const ExtendedFrameField f = read_frame_dump(out, "frame");
  CHECK(f.grid().nx == 3);
  CHECK(f.grid().ny == 3);
  const MatrixLoop id = MatrixLoop::identity(2, 8);
  for (int iy = 0; iy < 3; ++iy)
    for (int ix = 0; ix < 3; ++ix)
      CHECK(loop_distance(f.field.at(ix, iy), id) <= 1e-12);
}

TEST_CASE("backward audits the recovered potential") {
  const std::string fwd = forward_out(RealForm::compact);
  const std::string out = out_dir("out_bwd");
  REQUIRE(run({"backward", "--config", write_config("config.json", RealForm::compact),
               "--out", out, fwd + "/frame"}) == 0);
  CHECK(fs::exists(fs::path(out) / "potential_samples.csv"));
  const Json audit = load_json_file(out + "/backward_audit.json");
  CHECK(audit["schema"] == "dpwkit-backward/1");
  CHECK(audit["audit"]["all_pass"] == true);
}

TEST_CASE("transport by conjugation writes a dump and a passing audit") {
  const std::string fwd = forward_out(RealForm::compact);
  MoveSpec spec;
  spec.type = "conjugation";
  spec.z_target = Complex(0.15, 0);  // grid node with F0(., 1) = I
  spec.h = dpwtest::torus(0.5);
  const fs::path mv = base_dir() / "move_conj.json";
  write_json_file(mv.string(), move_to_json(spec));

  const std::string out = out_dir("out_conj");
  REQUIRE(run({"transport", "--config", write_config("config.json", RealForm::compact),
               "--out", out, fwd + "/frame", mv.string()}) == 0);
  const Json audit = load_json_file(out + "/transport_audit.json");
  CHECK(audit["schema"] == "dpwkit-transport/1");
  CHECK(audit["move_type"] == "conjugation");
  CHECK(audit["audit"]["all_pass"] == true);

  const ExtendedFrameField t = read_frame_dump(out, "transported");
  CHECK(t.basepoint == spec.z_target);
  CHECK((t.frame_at(spec.z_target).evaluate(Complex(1, 0)) - CMatrix::Identity(2, 2))
            .norm() <= 1e-9);
}

TEST_CASE("transport by dressing writes a dump and a passing audit") {
  const std::string fwd = forward_out(RealForm::compact);
  MoveSpec spec;
  spec.type = "dressing";
  spec.z_target = Complex(0.15, 0);
  spec.gauge = dpwtest::torus(M_PI / 7);
  spec.has_gauge = true;
  const fs::path mv = base_dir() / "move_dress.json";
  write_json_file(mv.string(), move_to_json(spec));

  const std::string out = out_dir("out_dress");
  REQUIRE(run({"transport", "--config", write_config("config.json", RealForm::compact),
               "--out", out, fwd + "/frame", mv.string()}) == 0);
  const Json audit = load_json_file(out + "/transport_audit.json");
  CHECK(audit["move_type"] == "dressing");
  CHECK(audit["audit"]["all_pass"] == true);
  const ExtendedFrameField t = read_frame_dump(out, "transported");
  CHECK(t.basepoint == spec.z_target);
}

TEST_CASE("dual requires the indefinite form and connects the dual frames") {
  const std::string cfg = write_config("config.json", RealForm::compact);
  const std::string fwd_c = forward_out(RealForm::compact);
  MoveSpec spec;
  spec.type = "dressing";
  spec.z_target = Complex(0.15, 0);
  const fs::path mv = base_dir() / "move_dual.json";
  write_json_file(mv.string(), move_to_json(spec));

  std::string text;
  CHECK(run({"dual", "--config", cfg, "--out", out_dir("out_dual_bad"), fwd_c + "/frame",
             mv.string()}, &text) == 2);
  CHECK(error_of(text)["kind"] == "schema");

  const std::string fwd_i = forward_out(RealForm::indefinite);
  const std::string out = out_dir("out_dual");
  REQUIRE(run({"dual", "--config", write_config("config_ind.json", RealForm::indefinite),
               "--out", out, fwd_i + "/frame", mv.string()}) == 0);
  const Json audit = load_json_file(out + "/dual_audit.json");
  CHECK(audit["schema"] == "dpwkit-dual/1");
  CHECK(audit["audit"]["all_pass"] == true);

  // before the move, the dual of the indefinite vacuum is the compact vacuum
  const ExtendedFrameField d0 = read_frame_dump(out, "dual_before");
  CHECK(d0.form == RealForm::compact);
  const Complex z = d0.grid().z(5, 2);
  CHECK(loop_distance(d0.field.at(5, 2),
                      dpwtest::vacuum_frame(z, 8, RealForm::compact)) <= 1e-8);
  CHECK(fs::exists(fs::path(out) / "dual_after.csv"));
  CHECK(fs::exists(fs::path(out) / "dual_connecting.csv"));
}

TEST_CASE("verification reports are byte-identical across reruns") {
  RunConfig cfg;
  cfg.truncation = 3;
  cfg.grid.lo = Complex(-0.25, -0.25);
  cfg.grid.hi = Complex(0.25, 0.25);
  cfg.grid.nx = cfg.grid.ny = 5;
  cfg.seed = 7;
  const fs::path p = base_dir() / "config_verify.json";
  write_json_file(p.string(), config_to_json(cfg));
  const std::string out = out_dir("out_verify");

  std::string text1;
  const int rc1 = run({"verify", "--config", p.string(), "--out", out}, &text1);
  CHECK((rc1 == 0 || rc1 == 1));
  const std::string rep_txt = slurp(fs::path(out) / "report.txt");
  const std::string rep_json = slurp(fs::path(out) / "report.json");
  CHECK(text1.find("verification report") != std::string::npos);

  std::string text2;
  const int rc2 = run({"verify", "--config", p.string(), "--out", out}, &text2);
  CHECK(rc2 == rc1);
  CHECK(text2 == text1);
  CHECK(slurp(fs::path(out) / "report.txt") == rep_txt);
  CHECK(slurp(fs::path(out) / "report.json") == rep_json);
}

TEST_CASE("schema and move errors map to exit code 2 with a JSON report") {
  const std::string cfg = write_config("config.json", RealForm::compact);

  const fs::path bad = base_dir() / "broken.json";
  {
    std::ofstream f(bad);
    f << "{ not json";
  }
  std::string text;
  CHECK(run({"forward", "--config", cfg, "--out", out_dir("out_err1"), bad.string()},
            &text) == 2);
  CHECK(error_of(text)["kind"] == "schema");

  CHECK(run({"forward", "--config", cfg, "--out", out_dir("out_err2"),
             (base_dir() / "missing.json").string()}, &text) == 2);
  CHECK(error_of(text)["kind"] == "schema");

  // inadmissible conjugation datum: h is not in the real form
  MoveSpec spec;
  spec.type = "conjugation";
  spec.z_target = Complex(0.15, 0);
  spec.h = CMatrix::Zero(2, 2);
  spec.h(0, 0) = 2.0;
  spec.h(1, 1) = 0.5;
  const fs::path mv = base_dir() / "move_bad.json";
  write_json_file(mv.string(), move_to_json(spec));
  CHECK(run({"transport", "--config", cfg, "--out", out_dir("out_err3"),
             forward_out(RealForm::compact) + "/frame", mv.string()}, &text) == 2);
  CHECK(error_of(text)["kind"] == "move_invalid");

  CHECK(run({"forward"}, &text) == 2);  // missing required argument
  CHECK(error_of(text)["kind"] == "schema");

  CHECK(run({"--help"}, &text) == 0);
  CHECK(text.find("forward") != std::string::npos);
}

TEST_CASE("DPWKIT_LOG turns on progress lines") {
  const std::string cfg = write_config("config.json", RealForm::compact);
  std::stringstream errs;
  std::streambuf* old = std::cerr.rdbuf(errs.rdbuf());
  setenv("DPWKIT_LOG", "1", 1);
  run({"forward", "--config", cfg, "--grid", "3,3", "--out", out_dir("out_log"),
       write_vacuum_potential()});
  setenv("DPWKIT_LOG", "0", 1);
  std::cerr.rdbuf(old);
  CHECK(errs.str().find("[dpwkit] forward") != std::string::npos);
}
