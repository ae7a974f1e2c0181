#include "dpw/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dpw {

namespace {

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

double number_from(const Json& j, const std::string& where) {
  if (!j.is_number()) schema_fail(where, "expected a number");
  return j.get<double>();
}

}  // namespace

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2)
    schema_fail(where, "expected [re, im] or a number");
  return Complex(number_from(j[0], where), number_from(j[1], where));
}

Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema_fail(where, "expected a matrix (array of rows)");
  const size_t rows = j.size();
  size_t cols = 0;
  CMatrix m;
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].empty()) schema_fail(where, "malformed matrix row");
    if (i == 0) {
      cols = j[i].size();
      m = CMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (j[i].size() != cols) {
      schema_fail(where, "ragged matrix rows");
    }
    for (size_t k = 0; k < cols; ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          complex_from_json(j[i][k], where);
  }
  return m;
}

Json loop_to_json(const MatrixLoop& g) {
  Json coeffs = Json::array();
  for (int k = -g.degree(); k <= g.degree(); ++k) {
    Json re = Json::array(), im = Json::array();
    const CMatrix& c = g.at(k);
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      Json rrow = Json::array(), irow = Json::array();
      for (Eigen::Index jj = 0; jj < c.cols(); ++jj) {
        rrow.push_back(c(i, jj).real());
        irow.push_back(c(i, jj).imag());
      }
      re.push_back(std::move(rrow));
      im.push_back(std::move(irow));
    }
    coeffs.push_back(Json{{"k", k}, {"re", std::move(re)}, {"im", std::move(im)}});
  }
  return Json{{"n", g.size()},
              {"N", g.degree()},
              {"kind", g.kind() == LoopKind::group ? "group" : "algebra"},
              {"coefficients", std::move(coeffs)}};
}

MatrixLoop loop_from_json(const Json& j) {
  const std::string where = "loop";
  if (!j.is_object()) schema_fail(where, "expected an object");
  if (!j.contains("n") || !j.contains("N") || !j.contains("coefficients"))
    schema_fail(where, "missing n, N, or coefficients");
  const int n = j["n"].get<int>();
  const int N = j["N"].get<int>();
  if (n <= 0 || N < 0) schema_fail(where, "invalid n or N");
  LoopKind kind = LoopKind::group;
  if (j.contains("kind")) {
    const std::string k = j["kind"].get<std::string>();
    if (k == "algebra")
      kind = LoopKind::algebra;
    else if (k != "group")
      schema_fail(where, "kind must be group|algebra");
  }
  MatrixLoop g(n, N, kind);
  if (!j["coefficients"].is_array()) schema_fail(where, "coefficients must be an array");
  for (const Json& c : j["coefficients"]) {
    if (!c.contains("k") || !c.contains("re") || !c.contains("im"))
      schema_fail(where, "coefficient entry missing k/re/im");
    const int k = c["k"].get<int>();
    if (k < -N || k > N) schema_fail(where, "coefficient mode outside [-N, N]");
    const Json& re = c["re"];
    const Json& im = c["im"];
    if (!re.is_array() || !im.is_array() || re.size() != static_cast<size_t>(n) ||
        im.size() != static_cast<size_t>(n))
      schema_fail(where, "coefficient blocks must be n x n");
    CMatrix m = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      if (re[static_cast<size_t>(i)].size() != static_cast<size_t>(n) ||
          im[static_cast<size_t>(i)].size() != static_cast<size_t>(n))
        schema_fail(where, "coefficient blocks must be n x n");
      for (int q = 0; q < n; ++q)
        m(i, q) = Complex(
            number_from(re[static_cast<size_t>(i)][static_cast<size_t>(q)], where),
            number_from(im[static_cast<size_t>(i)][static_cast<size_t>(q)], where));
    }
    g.at(k) = m;
  }
  return g;
}

Json grid_to_json(const GridSpec& g) {
  return Json{{"lo", complex_to_json(g.lo)},
              {"hi", complex_to_json(g.hi)},
              {"nx", g.nx},
              {"ny", g.ny}};
}

GridSpec grid_from_json(const Json& j) {
  GridSpec g;
  if (!j.is_object()) schema_fail("grid", "expected an object");
  if (j.contains("lo")) g.lo = complex_from_json(j["lo"], "grid.lo");
  if (j.contains("hi")) g.hi = complex_from_json(j["hi"], "grid.hi");
  if (j.contains("nx")) g.nx = j["nx"].get<int>();
  if (j.contains("ny")) g.ny = j["ny"].get<int>();
  g.validate();
  return g;
}

Json config_to_json(const RunConfig& c) {
  Json lams = Json::array();
  for (Complex l : c.lambda_samples) lams.push_back(complex_to_json(l));
  return Json{{"truncation", c.truncation},
              {"grid", grid_to_json(c.grid)},
              {"form", to_string(c.form)},
              {"lambda_samples", std::move(lams)},
              {"seed", c.seed},
              {"structural_tol", c.structural_tol},
              {"pipeline_tol", c.pipeline_tol},
              {"output_dir", c.output_dir}};
}

RunConfig config_from_json(const Json& j) {
  RunConfig c;
  if (!j.is_object()) schema_fail("config", "expected an object");
  if (j.contains("truncation")) c.truncation = j["truncation"].get<int>();
  if (j.contains("grid")) c.grid = grid_from_json(j["grid"]);
  if (j.contains("form")) c.form = real_form_from_string(j["form"].get<std::string>());
  if (j.contains("lambda_samples")) {
    c.lambda_samples.clear();
    if (!j["lambda_samples"].is_array())
      schema_fail("config", "lambda_samples must be an array");
    for (const Json& l : j["lambda_samples"])
      c.lambda_samples.push_back(complex_from_json(l, "config.lambda_samples"));
  }
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("structural_tol")) c.structural_tol = j["structural_tol"].get<double>();
  if (j.contains("pipeline_tol")) c.pipeline_tol = j["pipeline_tol"].get<double>();
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  c.validate();
  return c;
}

namespace {

Json poly_to_json(const PolyMatrix& p) {
  Json out = Json::array();
  for (const CMatrix& c : p.coeffs) out.push_back(matrix_to_json(c));
  return out;
}

PolyMatrix poly_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema_fail(where, "expected a non-empty array");
  PolyMatrix p;
  for (const Json& c : j) p.coeffs.push_back(matrix_from_json(c, where));
  return p;
}

}  // namespace

Json potential_to_json(const PotentialOneForm& p) {
  Json terms = Json::array();
  for (const auto& t : p.terms) {
    Json den = Json::array();
    for (Complex c : t.fn.den) den.push_back(complex_to_json(c));
    terms.push_back(Json{{"mode", t.mode},
                         {"numerator_poly", poly_to_json(t.fn.num)},
                         {"denominator_poly", std::move(den)}});
  }
  Json poles = Json::array();
  for (Complex z : p.poles) poles.push_back(complex_to_json(z));
  Json dom;
  if (p.domain.kind == Domain::Kind::rect)
    dom = Json{{"type", "rect"},
               {"lo", complex_to_json(p.domain.lo)},
               {"hi", complex_to_json(p.domain.hi)}};
  else
    dom = Json{{"type", "disk"},
               {"center", complex_to_json(p.domain.center)},
               {"radius", p.domain.radius}};
  return Json{{"n", p.n},
              {"basepoint", complex_to_json(p.basepoint)},
              {"domain", std::move(dom)},
              {"terms", std::move(terms)},
              {"poles", std::move(poles)}};
}

PotentialOneForm potential_from_json(const Json& j) {
  const std::string where = "potential";
  if (!j.is_object()) schema_fail(where, "expected an object");
  PotentialOneForm p;
  if (j.contains("n")) p.n = j["n"].get<int>();
  if (j.contains("basepoint"))
    p.basepoint = complex_from_json(j["basepoint"], where + ".basepoint");
  if (j.contains("domain")) {
    const Json& d = j["domain"];
    if (!d.is_object() || !d.contains("type")) schema_fail(where, "malformed domain");
    const std::string t = d["type"].get<std::string>();
    if (t == "rect") {
      p.domain.kind = Domain::Kind::rect;
      if (d.contains("lo")) p.domain.lo = complex_from_json(d["lo"], where + ".domain");
      if (d.contains("hi")) p.domain.hi = complex_from_json(d["hi"], where + ".domain");
    } else if (t == "disk") {
      p.domain.kind = Domain::Kind::disk;
      if (d.contains("center"))
        p.domain.center = complex_from_json(d["center"], where + ".domain");
      if (d.contains("radius")) p.domain.radius = d["radius"].get<double>();
    } else {
      schema_fail(where, "domain type must be rect|disk");
    }
  }
  if (!j.contains("terms") || !j["terms"].is_array())
    schema_fail(where, "missing terms array");
  for (const Json& t : j["terms"]) {
    if (!t.is_object() || !t.contains("mode") || !t.contains("numerator_poly"))
      schema_fail(where, "term missing mode or numerator_poly");
    PotentialTerm term;
    term.mode = t["mode"].get<int>();
    term.fn.num = poly_from_json(t["numerator_poly"], where + ".numerator_poly");
    if (t.contains("denominator_poly")) {
      term.fn.den.clear();
      if (!t["denominator_poly"].is_array() || t["denominator_poly"].empty())
        schema_fail(where, "denominator_poly must be a non-empty array");
      for (const Json& c : t["denominator_poly"])
        term.fn.den.push_back(complex_from_json(c, where + ".denominator_poly"));
    }
    p.terms.push_back(std::move(term));
  }
  if (j.contains("poles")) {
    if (!j["poles"].is_array()) schema_fail(where, "poles must be an array");
    for (const Json& z : j["poles"])
      p.poles.push_back(complex_from_json(z, where + ".poles"));
  }
  p.validate();
  return p;
}

MoveSpec move_from_json(const Json& j) {
  const std::string where = "move";
  if (!j.is_object() || !j.contains("type")) schema_fail(where, "missing type");
  MoveSpec m;
  m.type = j["type"].get<std::string>();
  if (m.type != "conjugation" && m.type != "dressing")
    schema_fail(where, "type must be conjugation|dressing");
  if (!j.contains("z_target")) schema_fail(where, "missing z_target");
  m.z_target = complex_from_json(j["z_target"], where + ".z_target");
  if (j.contains("z_source")) {
    m.z_source = complex_from_json(j["z_source"], where + ".z_source");
    m.has_source = true;
  }
  if (m.type == "conjugation") {
    if (!j.contains("h")) schema_fail(where, "conjugation move missing h");
    m.h = matrix_from_json(j["h"], where + ".h");
  }
  if (j.contains("gauge")) {
    m.gauge = matrix_from_json(j["gauge"], where + ".gauge");
    m.has_gauge = true;
  }
  if (j.contains("ring_g")) m.ring = loop_from_json(j["ring_g"]);
  return m;
}

Json move_to_json(const MoveSpec& m) {
  Json j{{"type", m.type}, {"z_target", complex_to_json(m.z_target)}};
  if (m.has_source) j["z_source"] = complex_to_json(m.z_source);
  if (m.type == "conjugation") j["h"] = matrix_to_json(m.h);
  if (m.has_gauge) j["gauge"] = matrix_to_json(m.gauge);
  if (m.ring) j["ring_g"] = loop_to_json(*m.ring);
  return j;
}

Json diagnostics_to_json(const Diagnostics& d) {
  Json values = Json::object();
  for (const auto& [k, v] : d.values) values[k] = v;
  Json flagged = Json::array();
  for (const auto& f : d.flagged)
    flagged.push_back(Json{
        {"ix", f.ix}, {"iy", f.iy}, {"kind", f.kind}, {"message", f.message}});
  return Json{{"values", std::move(values)}, {"flagged", std::move(flagged)}};
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_frame_dump(const std::string& dir, const std::string& stem,
                      const ExtendedFrameField& f, const Diagnostics& diag) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const int n = f.field.values.front().size();
  const int N = f.field.values.front().degree();

  Json meta{{"schema", "dpwkit-frame/1"},
            {"n", n},
            {"N", N},
            {"form", to_string(f.form)},
            {"basepoint", complex_to_json(f.basepoint)},
            {"grid", grid_to_json(f.grid())},
            {"valid_points", f.field.valid_count()}};
  write_json_file(dir + "/" + stem + ".meta.json", meta);
  write_json_file(dir + "/" + stem + ".diagnostics.json", diagnostics_to_json(diag));

  std::ostringstream csv;
  csv << "ix,iy,z_re,z_im";
  for (int k = -N; k <= N; ++k)
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < n; ++q)
        csv << ",c" << k << "_" << i << q << "_re,c" << k << "_" << i << q << "_im";
  csv << "\n";
  const GridSpec& g = f.grid();
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      if (!f.field.ok(ix, iy)) continue;
      const Complex z = g.z(ix, iy);
      csv << ix << "," << iy << "," << format_double(z.real()) << ","
          << format_double(z.imag());
      const MatrixLoop& loop = f.field.at(ix, iy);
      for (int k = -N; k <= N; ++k)
        for (int i = 0; i < n; ++i)
          for (int q = 0; q < n; ++q) {
            const Complex c = loop.at(k)(i, q);
            csv << "," << format_double(c.real()) << "," << format_double(c.imag());
          }
      csv << "\n";
    }
  write_text_file(dir + "/" + stem + ".csv", csv.str());

  std::ostringstream fl;
  fl << "ix,iy,kind,message\n";
  for (const auto& p : diag.flagged) {
    std::string msg = p.message;
    for (char& ch : msg)
      if (ch == ',' || ch == '\n') ch = ';';
    fl << p.ix << "," << p.iy << "," << p.kind << "," << msg << "\n";
  }
  write_text_file(dir + "/" + stem + ".flagged.csv", fl.str());
}

ExtendedFrameField read_frame_dump(const std::string& dir, const std::string& stem) {
  const Json meta = load_json_file(dir + "/" + stem + ".meta.json");
  if (!meta.contains("schema") || meta["schema"] != "dpwkit-frame/1")
    throw SchemaError("frame dump: unrecognised meta schema");
  const int n = meta["n"].get<int>();
  const int N = meta["N"].get<int>();

  ExtendedFrameField f;
  f.form = real_form_from_string(meta["form"].get<std::string>());
  f.model = GroupModel::rank_one(f.form);
  f.basepoint = complex_from_json(meta["basepoint"], "frame meta basepoint");
  GridSpec grid = grid_from_json(meta["grid"]);
  f.field.grid = grid;
  f.field.values.assign(static_cast<size_t>(grid.points()), MatrixLoop(n, N));
  f.field.valid.assign(static_cast<size_t>(grid.points()), 0);

  std::ifstream in(dir + "/" + stem + ".csv");
  if (!in) throw SchemaError("frame dump: cannot open " + dir + "/" + stem + ".csv");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("frame dump: empty csv");
  const size_t expected_fields = 4 + static_cast<size_t>((2 * N + 1) * n * n * 2);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (fields.size() != expected_fields)
      throw SchemaError("frame dump: csv row has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(expected_fields));
    const int ix = std::stoi(fields[0]);
    const int iy = std::stoi(fields[1]);
    if (ix < 0 || ix >= grid.nx || iy < 0 || iy >= grid.ny)
      throw SchemaError("frame dump: csv row outside the grid");
    MatrixLoop loop(n, N);
    size_t p = 4;
    for (int k = -N; k <= N; ++k)
      for (int i = 0; i < n; ++i)
        for (int q = 0; q < n; ++q) {
          loop.at(k)(i, q) = Complex(std::stod(fields[p]), std::stod(fields[p + 1]));
          p += 2;
        }
    f.field.at(ix, iy) = loop;
    f.field.valid[static_cast<size_t>(grid.index(ix, iy))] = 1;
  }
  return f;
}

void write_family_csv(const std::string& path, const AssociatedFamilySample& fam) {
  std::ostringstream csv;
  csv << "lambda_re,lambda_im,ix,iy,z_re,z_im";
  const int n = fam.maps.empty() ? 0
                                 : static_cast<int>(fam.maps.front().values.front().rows());
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < n; ++q) csv << ",p" << i << q << "_re,p" << i << q << "_im";
  csv << "\n";
  for (size_t li = 0; li < fam.lambdas.size(); ++li) {
    const Complex lam = fam.lambdas[li];
    const MatrixField& map = fam.maps[li];
    for (int iy = 0; iy < map.grid.ny; ++iy)
      for (int ix = 0; ix < map.grid.nx; ++ix) {
        if (!map.ok(ix, iy)) continue;
        const Complex z = map.grid.z(ix, iy);
        csv << format_double(lam.real()) << "," << format_double(lam.imag()) << ","
            << ix << "," << iy << "," << format_double(z.real()) << ","
            << format_double(z.imag());
        const CMatrix& p = map.at(ix, iy);
        for (int i = 0; i < n; ++i)
          for (int q = 0; q < n; ++q)
            csv << "," << format_double(p(i, q).real()) << ","
                << format_double(p(i, q).imag());
        csv << "\n";
      }
  }
  write_text_file(path, csv.str());
}

void write_potential_samples_csv(const std::string& path, const MatrixField& xi) {
  std::ostringstream csv;
  const int n = static_cast<int>(xi.values.front().rows());
  csv << "ix,iy,z_re,z_im";
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < n; ++q) csv << ",xi" << i << q << "_re,xi" << i << q << "_im";
  csv << "\n";
  for (int iy = 0; iy < xi.grid.ny; ++iy)
    for (int ix = 0; ix < xi.grid.nx; ++ix) {
      if (!xi.ok(ix, iy)) continue;
      const Complex z = xi.grid.z(ix, iy);
      csv << ix << "," << iy << "," << format_double(z.real()) << ","
          << format_double(z.imag());
      const CMatrix& v = xi.at(ix, iy);
      for (int i = 0; i < n; ++i)
        for (int q = 0; q < n; ++q)
          csv << "," << format_double(v(i, q).real()) << ","
              << format_double(v(i, q).imag());
      csv << "\n";
    }
  write_text_file(path, csv.str());
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const Json::exception& e) {
    throw SchemaError("failed to parse " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path);
  out << content;
}

}  // namespace dpw
