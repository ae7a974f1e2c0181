#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace dpw {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kStructuralTol = 1e-10;  // algebraic identities
inline constexpr double kPipelineTol = 1e-8;     // multi-stage numerical pipelines
inline constexpr double kBigCellRcond = 1e-12;   // reciprocal-condition cutoff for Birkhoff

// Error taxonomy shared by the library and the CLI.  `kind()` is the stable
// machine-readable tag that ends up in error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("schema", what) {}
};

class MoveInvalid : public Error {
 public:
  explicit MoveInvalid(const std::string& what) : Error("move_invalid", what) {}
};

class PoleOnPath : public Error {
 public:
  PoleOnPath(const std::string& what, Complex where)
      : Error("pole_on_path", what), where_(where) {}
  Complex where() const noexcept { return where_; }

 private:
  Complex where_;
};

class OutsideBigCell : public Error {
 public:
  explicit OutsideBigCell(const std::string& what, double rcond = 0.0)
      : Error("outside_big_cell", what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class OutsideIwasawaCell : public Error {
 public:
  explicit OutsideIwasawaCell(const std::string& what)
      : Error("outside_iwasawa_cell", what) {}
};

class NumericalBreakdown : public Error {
 public:
  explicit NumericalBreakdown(const std::string& what) : Error("numerical", what) {}
};

inline std::string complex_to_string(Complex z) {
  return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")";
}

}  // namespace dpw
