#include "dpw/fields.hpp"

#include <cmath>

namespace dpw {

void GridSpec::validate() const {
  if (nx < 2 || ny < 2)
    throw SchemaError("grid: resolution must be at least 2 per axis");
  if (!(hi.real() > lo.real()) || !(hi.imag() > lo.imag()))
    throw SchemaError("grid: upper corner must exceed lower corner");
}

bool GridSpec::find(Complex zq, int& ix, int& iy, double tol) const {
  const double fx = (zq.real() - lo.real()) / dx();
  const double fy = (zq.imag() - lo.imag()) / dy();
  ix = static_cast<int>(std::lround(fx));
  iy = static_cast<int>(std::lround(fy));
  if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) return false;
  return std::abs(z(ix, iy) - zq) <= tol;
}

LoopField LoopField::constant(const GridSpec& g, const MatrixLoop& v) {
  LoopField f;
  f.grid = g;
  f.values.assign(static_cast<size_t>(g.points()), v);
  f.valid.assign(static_cast<size_t>(g.points()), 1);
  return f;
}

int LoopField::valid_count() const {
  int c = 0;
  for (auto v : valid) c += (v != 0);
  return c;
}

MatrixField MatrixField::constant(const GridSpec& g, const CMatrix& v) {
  MatrixField f;
  f.grid = g;
  f.values.assign(static_cast<size_t>(g.points()), v);
  f.valid.assign(static_cast<size_t>(g.points()), 1);
  return f;
}

const MatrixLoop& ExtendedFrameField::frame_at(Complex z) const {
  int ix = 0, iy = 0;
  if (!field.grid.find(z, ix, iy))
    throw std::invalid_argument("frame_at: " + complex_to_string(z) +
                                " is not a grid node");
  if (!field.ok(ix, iy))
    throw NumericalBreakdown("frame_at: frame at " + complex_to_string(z) +
                             " was flagged during computation");
  return field.at(ix, iy);
}

}  // namespace dpw
