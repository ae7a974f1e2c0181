#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpw/matrix_loop.hpp"

namespace dpw {

// Uniform rectangular grid over [lo.re, hi.re] x [lo.im, hi.im], row-major in
// the x index.  Endpoints are included; nx, ny >= 2 so spacings are defined.
struct GridSpec {
  Complex lo{-0.5, -0.5};
  Complex hi{0.5, 0.5};
  int nx = 21;
  int ny = 21;

  int points() const { return nx * ny; }
  double dx() const { return (hi.real() - lo.real()) / (nx - 1); }
  double dy() const { return (hi.imag() - lo.imag()) / (ny - 1); }
  Complex z(int ix, int iy) const {
    return {lo.real() + ix * dx(), lo.imag() + iy * dy()};
  }
  int index(int ix, int iy) const { return iy * nx + ix; }
  void validate() const;
  // Locates z among the nodes within `tol`; returns false if absent.
  bool find(Complex z, int& ix, int& iy, double tol = 1e-9) const;
};

struct FlaggedPoint {
  int ix = 0;
  int iy = 0;
  std::string kind;     // error taxonomy tag
  std::string message;
};

// A loop-valued sample on a grid.  `valid` marks points whose computation
// succeeded; flagged points carry the error that excluded them.
struct LoopField {
  GridSpec grid;
  std::vector<MatrixLoop> values;
  std::vector<std::uint8_t> valid;

  static LoopField constant(const GridSpec& g, const MatrixLoop& v);
  const MatrixLoop& at(int ix, int iy) const { return values[grid.index(ix, iy)]; }
  MatrixLoop& at(int ix, int iy) { return values[grid.index(ix, iy)]; }
  bool ok(int ix, int iy) const { return valid[grid.index(ix, iy)] != 0; }
  int valid_count() const;
};

// A matrix-valued sample on a grid (loop evaluated at fixed lambda, potential
// coefficients, ...).
struct MatrixField {
  GridSpec grid;
  std::vector<CMatrix> values;
  std::vector<std::uint8_t> valid;

  static MatrixField constant(const GridSpec& g, const CMatrix& v);
  const CMatrix& at(int ix, int iy) const { return values[grid.index(ix, iy)]; }
  CMatrix& at(int ix, int iy) { return values[grid.index(ix, iy)]; }
  bool ok(int ix, int iy) const { return valid[grid.index(ix, iy)] != 0; }
};

// Sampled loop-valued 1-form alpha = a dz + b dzbar.
struct LoopOneFormField {
  GridSpec grid;
  std::vector<MatrixLoop> dz;
  std::vector<MatrixLoop> dzbar;
  std::vector<std::uint8_t> valid;
  bool ok(int ix, int iy) const { return valid[grid.index(ix, iy)] != 0; }
};

// Sampled matrix-valued 1-form.
struct MatrixOneFormField {
  GridSpec grid;
  std::vector<CMatrix> dz;
  std::vector<CMatrix> dzbar;
  std::vector<std::uint8_t> valid;
  bool ok(int ix, int iy) const { return valid[grid.index(ix, iy)] != 0; }
};

// Extended frame sample: a loop field together with its base point and the
// real form the frames live in.
struct ExtendedFrameField {
  LoopField field;
  Complex basepoint{0, 0};
  RealForm form = RealForm::compact;
  GroupModel model = GroupModel::rank_one(RealForm::compact);

  const GridSpec& grid() const { return field.grid; }
  // Frame at a node that must exist and be valid; throws otherwise.
  const MatrixLoop& frame_at(Complex z) const;
};

}  // namespace dpw
