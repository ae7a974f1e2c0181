#include "dpw/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace dpw {

ForwardResult forward_dpw(const PotentialOneForm& eta, const GridSpec& grid,
                          RealForm form, const GroupModel& model,
                          const PipelineOptions& opt) {
  grid.validate();
  eta.validate();
  const int N = opt.degree;
  const int n = eta.n;

  ForwardResult out;
  out.frame.basepoint = eta.basepoint;
  out.frame.form = form;
  out.frame.model = model;
  out.frame.field = LoopField::constant(grid, MatrixLoop::identity(n, N));
  out.plus = LoopField::constant(grid, MatrixLoop::identity(n, N));
  out.holomorphic = LoopField::constant(grid, MatrixLoop::identity(n, N));

  out.diag.maximize("potential_twist_residual", eta.twist_residual(model));

  // Sweep row by row so each Iwasawa split can be warm-started from its left
  // neighbour; the first point of a row starts from the row below.
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int idx = grid.index(ix, iy);
      const Complex z = grid.z(ix, iy);
      try {
        MatrixLoop fm = integrate_holomorphic_to(eta, z, N, opt.integration);
        out.holomorphic.values[static_cast<size_t>(idx)] = fm;

        FactorOptions fopt = opt.factor;
        const MatrixLoop* warm = nullptr;
        if (ix > 0 && out.plus.ok(ix - 1, iy))
          warm = &out.plus.at(ix - 1, iy);
        else if (iy > 0 && out.plus.ok(ix, iy - 1))
          warm = &out.plus.at(ix, iy - 1);
        fopt.warm_start = warm;

        IwasawaPair p = iwasawa_split(fm, model, form, fopt);
        out.frame.field.values[static_cast<size_t>(idx)] = p.real_part;
        out.plus.values[static_cast<size_t>(idx)] = p.plus_part;
        out.diag.maximize("iwasawa_factor_residual", p.factor_residual);
        out.diag.maximize("iwasawa_reconstruction", p.reconstruction);
        out.diag.maximize("frame_realness", p.realness);
        out.diag.maximize("frame_twist",
                          check_twisted(p.real_part, model).max_violation);
      } catch (const Error& e) {
        out.frame.field.valid[static_cast<size_t>(idx)] = 0;
        out.plus.valid[static_cast<size_t>(idx)] = 0;
        out.holomorphic.valid[static_cast<size_t>(idx)] = 0;
        out.diag.flagged.push_back({ix, iy, e.kind(), e.what()});
      }
    }
  }

  if (out.frame.field.valid_count() == 0)
    throw NumericalBreakdown("forward_dpw: every grid point failed (first: " +
                             (out.diag.flagged.empty()
                                  ? std::string("none")
                                  : out.diag.flagged.front().message) +
                             ")");

  // Base-point normalisation audit: the holomorphic frame starts at the
  // identity, and the Iwasawa split of the identity is exact, so the frame at
  // the base point is the identity up to solver noise whenever it is a node.
  int bx = 0, by = 0;
  if (grid.find(eta.basepoint, bx, by) && out.frame.field.ok(bx, by)) {
    const MatrixLoop& fb = out.frame.field.at(bx, by);
    out.diag.maximize("basepoint_identity",
                      loop_distance(fb, MatrixLoop::identity(n, N)));
  }
  return out;
}

BackwardResult backward_dpw(const ExtendedFrameField& frame,
                            const PipelineOptions& opt) {
  const GridSpec& grid = frame.grid();
  const LoopField& F = frame.field;
  if (F.values.empty()) throw std::invalid_argument("backward_dpw: empty frame field");
  const int n = F.values.front().size();
  const int N = F.values.front().degree();

  BackwardResult out;
  out.xi = MatrixField::constant(grid, CMatrix::Zero(n, n));
  out.holomorphic = LoopField::constant(grid, MatrixLoop::identity(n, N));

  // Per-point Birkhoff split of the frame; the minus factor is the
  // holomorphic frame in normalized form.
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int idx = grid.index(ix, iy);
      if (!F.ok(ix, iy)) {
        out.holomorphic.valid[static_cast<size_t>(idx)] = 0;
        out.xi.valid[static_cast<size_t>(idx)] = 0;
        continue;
      }
      try {
        BirkhoffPair p = birkhoff_split(F.at(ix, iy), frame.model, opt.factor);
        out.holomorphic.values[static_cast<size_t>(idx)] = p.minus;
        out.diag.maximize("birkhoff_reconstruction", p.reconstruction);
      } catch (const Error& e) {
        out.holomorphic.valid[static_cast<size_t>(idx)] = 0;
        out.xi.valid[static_cast<size_t>(idx)] = 0;
        out.diag.flagged.push_back({ix, iy, e.kind(), e.what()});
      }
    }

  // Base-point normalisation: the minus factor at the base point is the
  // identity (its split is trivial) whenever the base point is a node.
  int bx = 0, by = 0;
  if (grid.find(frame.basepoint, bx, by) && out.holomorphic.ok(bx, by))
    out.diag.maximize(
        "basepoint_identity",
        loop_distance(out.holomorphic.at(bx, by), MatrixLoop::identity(n, N)));

  // Derivative of the minus field via logarithmic transition quotients; for a
  // holomorphic family the dzbar part and the modes other than -1 vanish up
  // to discretisation error, which the audits below quantify.
  LoopOneFormField mc = mc_form_log(out.holomorphic);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int idx = grid.index(ix, iy);
      if (!out.xi.valid[static_cast<size_t>(idx)]) continue;
      if (!mc.ok(ix, iy)) {
        out.xi.valid[static_cast<size_t>(idx)] = 0;
        continue;
      }
      const MatrixLoop& a = mc.dz[static_cast<size_t>(idx)];
      const MatrixLoop& b = mc.dzbar[static_cast<size_t>(idx)];
      out.xi.values[static_cast<size_t>(idx)] = a.coeff(-1);

      double off = 0;
      for (int k = -N; k <= N; ++k)
        if (k != -1) off = std::max(off, a.coeff(k).norm());
      out.diag.maximize("mode_purity", off);
      out.diag.maximize("dzbar_mass", b.max_coeff_norm());
      out.diag.maximize("nonneg_mode_mass", a.mass_above(-1));
      out.diag.maximize(
          "p_valued_residual",
          frame.model.k_part(out.xi.values[static_cast<size_t>(idx)]).norm());
    }
  return out;
}

AssociatedFamilySample associated_family(const ExtendedFrameField& frame,
                                         const std::vector<Complex>& lambdas) {
  AssociatedFamilySample out;
  out.lambdas = lambdas;
  const GridSpec& grid = frame.grid();
  const GroupModel& model = frame.model;
  for (Complex lam : lambdas) {
    if (std::abs(std::abs(lam) - 1.0) > 1e-12)
      throw std::invalid_argument("associated_family: lambda " +
                                  complex_to_string(lam) +
                                  " is not on the unit circle");
    MatrixField map = MatrixField::constant(grid, model.twist);
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix) {
        const int idx = grid.index(ix, iy);
        if (!frame.field.ok(ix, iy)) {
          map.valid[static_cast<size_t>(idx)] = 0;
          continue;
        }
        const CMatrix m = frame.field.at(ix, iy).evaluate(lam);
        const CMatrix p = m * model.twist * m.inverse();
        map.values[static_cast<size_t>(idx)] = p;
        // Spectral audit: P is conjugate to Q, so P^2 must equal Q^2 (a
        // scalar in the rank-one model) and tr P must equal tr Q.
        out.diag.maximize("spectral_residual",
                          (p * p - model.twist * model.twist).norm());
        out.diag.maximize("trace_residual",
                          std::abs(p.trace() - model.twist.trace()));
      }
    out.maps.push_back(std::move(map));
  }

  // Base-point audit: the map at the base point is the twist matrix itself.
  int bx = 0, by = 0;
  if (grid.find(frame.basepoint, bx, by))
    for (const auto& map : out.maps)
      if (map.ok(bx, by))
        out.diag.maximize("basepoint_value",
                          (map.at(bx, by) - model.twist).norm());
  return out;
}

}  // namespace dpw
