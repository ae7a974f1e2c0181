#pragma once

#include "dpw/pipeline.hpp"

namespace dpw {

// Base-point move by a constant conjugation: h in the real form with
// h P(z0) h^{-1} = P(z1) at lambda = 1, where P is the Cartan embedding of
// the harmonic map.  The transported frame is
//   F1(z, lambda) = h F0(z, lambda) c h^{-1},
// with c = F0(z1, 1)^{-1} the constant gauge making F1(z1, .) the identity at
// lambda = 1.  The move is admissible only when that gauge lies in the
// diagonal torus of the real form; otherwise MoveInvalid is thrown.
struct ConjugationMove {
  CMatrix h;
  Complex z_source{0, 0};
  Complex z_target{0, 0};
};

struct MoveValidation {
  double realness = 0;        // || tau(h) - h ||
  double intertwine = 0;      // || h P(z0) h^{-1} - P(z1) ||  at lambda = 1
  double gauge_in_torus = 0;  // distance of F0(z1,1)^{-1} from the real torus
  bool ok(double tol) const {
    return realness <= tol && intertwine <= tol && gauge_in_torus <= tol;
  }
};

MoveValidation validate_conjugation(const ConjugationMove& move,
                                    const ExtendedFrameField& f0);

struct ConjugateResult {
  ExtendedFrameField frame;   // F1, twisted by sigma1 = Ad(h Q h^{-1})
  CMatrix gauge;              // the constant c = F0(z1, 1)^{-1}
  GroupModel model1;          // transported model (twist, cartan)
  Diagnostics diag;
};

// Throws MoveInvalid when the move fails validation at tolerance `tol`.
ConjugateResult conjugate_transport(const ExtendedFrameField& f0,
                                    const ConjugationMove& move,
                                    double tol = 1e-6);

// Transport of the involution package: sigma1 = Ad(h) sigma Ad(h)^{-1} via
// Q1 = h Q h^{-1}, and theta1 via the congruence C1 = h C h^H.  tau is
// unchanged for real h.
struct InvolutionTransport {
  CMatrix twist1;
  CMatrix cartan1;
  double sigma1_involutive = 0;
  double commutation = 0;   // pairwise commutation of sigma1, tau, theta1
};

InvolutionTransport involution_transport(const ConjugationMove& move,
                                         const GroupModel& model);

// Base-point move by dressing: ring_g = (F0(z2) k0)^{-1} for a constant gauge
// k0 in the torus, together with its Birkhoff factors.
struct DressingMove {
  MatrixLoop ring_g;
  MatrixLoop ring_minus;
  MatrixLoop ring_plus;
  CMatrix gauge;            // k0
  Complex z_source{0, 0};
  Complex z_target{0, 0};
};

// Builds the move from the frame at a grid node z2.  Validates that ring_g is
// twisted and in the real form, and audits the lambda = 1 intertwining
// ring_g(1)^{-1} P(z0) ring_g(1) = P(z2).
DressingMove compute_ring_g(const ExtendedFrameField& f0, Complex z2,
                            const CMatrix& gauge, Diagnostics* diag = nullptr);

// Dressing action on a normalized holomorphic frame: the minus factor of
// g_+ F_- g_+^{-1}.  Propagates OutsideBigCell from the underlying split.
MatrixLoop dress(const MatrixLoop& f_minus, const MatrixLoop& g_plus,
                 const GroupModel& model);

// Full dressed transport.  Two routes are computed per grid point:
//   (A)  F2_-(z) = ring_minus . dress(F0_-(z), ring_plus)
//   (B)  F2_-(z) = Birkhoff minus factor of ring_g . F0(z)
// which agree in exact arithmetic; their observed distance is a diagnostic.
struct DressedResult {
  LoopField f2_minus;             // route A
  LoopField f2_minus_direct;      // route B
  ExtendedFrameField f2_frame;    // full frames ring_g . F0(z) . k0
  Diagnostics diag;
};

DressedResult dressed_transport(const ExtendedFrameField& f0, const DressingMove& move);

// Compact-dual frames of an indefinite frame field before and after a
// dressing move: F = F_U V_+ under the compact Iwasawa splitting, and
//   F2_U(z) = ring_g F0_U(z) W_+(z)
// with W_+ holomorphic in the disk (a plus loop).  Returns both dual frames
// and the connecting W_+ field with its structure audit.
struct DualFrameResult {
  LoopField f0_dual;
  LoopField f2_dual;
  LoopField w_plus;
  Diagnostics diag;
};

DualFrameResult dual_frame_transport(const ExtendedFrameField& f0,
                                     const ExtendedFrameField& f2,
                                     const DressingMove& move);

}  // namespace dpw
