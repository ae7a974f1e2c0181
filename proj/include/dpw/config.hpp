#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpw/fields.hpp"

namespace dpw {

// Run-scale knobs shared by the CLI commands and the verification suite.
struct RunConfig {
  int truncation = 8;
  GridSpec grid;
  RealForm form = RealForm::compact;
  std::vector<Complex> lambda_samples = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                                         Complex(std::sqrt(0.5), std::sqrt(0.5))};
  std::uint64_t seed = 20240801;
  double structural_tol = kStructuralTol;
  double pipeline_tol = kPipelineTol;
  std::string output_dir = "out";

  void validate() const {
    grid.validate();
    if (truncation < 1) throw SchemaError("config: truncation must be >= 1");
    if (lambda_samples.empty())
      throw SchemaError("config: lambda_samples must be non-empty");
    for (Complex l : lambda_samples)
      if (std::abs(std::abs(l) - 1.0) > 1e-9)
        throw SchemaError("config: lambda sample " + complex_to_string(l) +
                          " is not on the unit circle");
  }
};

}  // namespace dpw
