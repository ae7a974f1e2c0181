#pragma once

#include <map>

#include "dpw/factorization.hpp"
#include "dpw/fields.hpp"
#include "dpw/potential.hpp"

namespace dpw {

// Named scalar diagnostics plus the list of grid points excluded by errors.
struct Diagnostics {
  std::map<std::string, double> values;
  std::vector<FlaggedPoint> flagged;

  double get(const std::string& key) const {
    auto it = values.find(key);
    return it == values.end() ? 0.0 : it->second;
  }
  void maximize(const std::string& key, double v) {
    auto [it, inserted] = values.try_emplace(key, v);
    if (!inserted) it->second = std::max(it->second, v);
  }
};

struct PipelineOptions {
  int degree = 8;
  IntegrationOptions integration;
  FactorOptions factor;
};

// Potential -> holomorphic frame (ODE) -> per-point Iwasawa -> extended frame.
struct ForwardResult {
  ExtendedFrameField frame;       // real-form frame F, F(basepoint) = I
  LoopField plus;                 // Iwasawa plus factors V_+
  LoopField holomorphic;          // integrated holomorphic frame F_-
  Diagnostics diag;
};

ForwardResult forward_dpw(const PotentialOneForm& eta, const GridSpec& grid,
                          RealForm form, const GroupModel& model,
                          const PipelineOptions& opt = {});

// Extended frame -> per-point Birkhoff -> normalized potential samples.
struct BackwardResult {
  MatrixField xi;                 // dz coefficient of the lambda^{-1} mode
  LoopField holomorphic;          // Birkhoff minus factors
  Diagnostics diag;               // mode purity / direction purity audits
};

BackwardResult backward_dpw(const ExtendedFrameField& frame,
                            const PipelineOptions& opt = {});

// Harmonic maps of the associated family via the Cartan embedding
// P_lambda(z) = F(z, lambda) Q F(z, lambda)^{-1} for |lambda| = 1.
struct AssociatedFamilySample {
  std::vector<Complex> lambdas;
  std::vector<MatrixField> maps;  // one field per lambda
  Diagnostics diag;
};

AssociatedFamilySample associated_family(const ExtendedFrameField& frame,
                                         const std::vector<Complex>& lambdas);

}  // namespace dpw
