#pragma once

#include <optional>

#include "dpw/matrix_loop.hpp"

namespace dpw {

struct FactorOptions {
  double rcond_threshold = kBigCellRcond;  // big-cell cutoff for Birkhoff
  int max_newton_steps = 60;
  double newton_tol = 1e-12;               // relative residual target
  // Optional warm start for the plus factor of the Iwasawa split (used by the
  // grid pipelines to seed Newton from a neighbouring point).
  const MatrixLoop* warm_start = nullptr;
};

// g = minus * plus with minus in the negative-mode subgroup normalised to
// identity constant term and plus in the non-negative-mode subgroup.
struct BirkhoffPair {
  MatrixLoop minus;
  MatrixLoop plus;
  double rcond = 0;                  // reciprocal condition of the mode solve
  double reconstruction = 0;         // || minus*plus - g || over the window
  double structural_cleanup = 0;     // solver noise removed from wrong modes
};

BirkhoffPair birkhoff_split(const MatrixLoop& g, const GroupModel& model,
                            const FactorOptions& opt = {});

// g = real_part * plus_part with real_part in the chosen real form (unitary
// loops for compact s, s-unitary for indefinite) and plus_part a non-negative
// loop whose constant term is upper triangular with positive diagonal.
struct IwasawaPair {
  MatrixLoop real_part;
  MatrixLoop plus_part;
  int newton_iterations = 0;
  double factor_residual = 0;        // || tau_star(V) V - tau_star(g) g ||_W
  double reconstruction = 0;         // || real*plus - g || over the window
  double realness = 0;               // pointwise real-form deviation of real_part
};

IwasawaPair iwasawa_split(const MatrixLoop& g, const GroupModel& model, RealForm form,
                          const FactorOptions& opt = {});

// Rotates an (F, V) pair by a constant k in the real form of the diagonal
// torus so that V's constant term becomes upper triangular with positive
// diagonal: F -> F k, V -> k^{-1} V.  Throws NumericalBreakdown when the
// constant term has a (numerically) zero diagonal entry.
IwasawaPair gauge_normalize(IwasawaPair pair, const GroupModel& model);

}  // namespace dpw
