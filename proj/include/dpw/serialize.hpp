#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "dpw/config.hpp"
#include "dpw/pipeline.hpp"
#include "dpw/potential.hpp"

namespace dpw {

using Json = nlohmann::json;

// Scalars and matrices.  Complex numbers travel as [re, im] pairs.
Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j, const std::string& where);
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& where);

// Loops: { n, N, kind, coefficients: [ { k, re: [[..]], im: [[..]] } ] }.
Json loop_to_json(const MatrixLoop& g);
MatrixLoop loop_from_json(const Json& j);

// Grids and run configuration (all fields optional on input, defaulted).
Json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const Json& j);
Json config_to_json(const RunConfig& c);
RunConfig config_from_json(const Json& j);

// Potentials: { n, basepoint, domain, terms: [ { mode, numerator_poly,
// denominator_poly } ], poles }.
Json potential_to_json(const PotentialOneForm& p);
PotentialOneForm potential_from_json(const Json& j);

// Base-point moves.  `type` is "conjugation" (field h) or "dressing"
// (optional explicit ring_g; otherwise computed from the frame at z_target).
struct MoveSpec {
  std::string type;
  Complex z_source{0, 0};
  bool has_source = false;
  Complex z_target{0, 0};
  CMatrix h;                      // conjugation
  CMatrix gauge;                  // optional torus gauge (identity default)
  bool has_gauge = false;
  std::optional<MatrixLoop> ring; // explicit dressing loop
};
MoveSpec move_from_json(const Json& j);
Json move_to_json(const MoveSpec& m);

Json diagnostics_to_json(const Diagnostics& d);

// Frame dumps: <stem>.meta.json + <stem>.csv (+ <stem>.flagged.csv).  The CSV
// carries one row per valid grid point with the flattened window coefficients.
void write_frame_dump(const std::string& dir, const std::string& stem,
                      const ExtendedFrameField& f, const Diagnostics& diag);
ExtendedFrameField read_frame_dump(const std::string& dir, const std::string& stem);

void write_family_csv(const std::string& path, const AssociatedFamilySample& fam);

// Sampled potential output of the backward pipeline.
void write_potential_samples_csv(const std::string& path, const MatrixField& xi);

// File plumbing.
Json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);
void write_text_file(const std::string& path, const std::string& content);
std::string format_double(double x);

}  // namespace dpw
