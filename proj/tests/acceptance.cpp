// Runs the full verification suite at the pinned default configuration and
// prints one pass/fail line per check.  Exit code 0 iff every check passes.
#include <exception>
#include <iostream>

#include "dpw/verify.hpp"

int main() {
  dpw::RunConfig cfg;  // defaults: truncation 8, 21x21 grid on [-0.5, 0.5]^2
  try {
    const dpw::VerificationReport rep = dpw::run_verification(cfg);
    std::cout << dpw::render_report(rep);
    const bool ok = rep.all_pass();
    std::cout << "ACCEPTANCE: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cout << "ACCEPTANCE: FAIL (unexpected error: " << e.what() << ")\n";
    return 1;
  }
}
