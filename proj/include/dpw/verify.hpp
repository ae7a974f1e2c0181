#pragma once

#include <string>
#include <vector>

#include "dpw/config.hpp"
#include "dpw/serialize.hpp"

namespace dpw {

// One verification check: the headline residual against its tolerance, with
// secondary bounds folded into `pass` and described in `note`.
struct CheckResult {
  std::string id;
  std::string name;
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
  std::string note;
};

struct VerificationReport {
  RunConfig config;
  std::vector<CheckResult> checks;
  // Scale advisories (e.g. closed-form Fourier mass beyond the working
  // window at small truncations); never affect pass/fail.
  std::vector<std::string> warnings;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// Runs the verification suite at the scale given by the config.  When
// `with_determinism` is set, the suite ends with a reduced-scale double run
// whose rendered reports must agree byte for byte; the inner runs disable
// that check to bound the recursion.
VerificationReport run_verification(const RunConfig& cfg, bool with_determinism = true);

// Plain-text rendering, one line per check; stable across runs of the same
// configuration (no timestamps, fixed formatting).
std::string render_report(const VerificationReport& report);
Json report_to_json(const VerificationReport& report);

}  // namespace dpw
