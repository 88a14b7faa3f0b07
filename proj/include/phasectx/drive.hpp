#pragma once

// Forced harmonic oscillator: the displacement and geometric phase produced by
// a coupling lambda(t) (b^dagger) + h.c. in the frame rotating at omega,
//   U~(tau) = e^{i phi} D(alpha~),  alpha~ = -i int_0^tau f,  f(t) = lambda(t) e^{i omega t},
//   phi = int_0^tau dt1 int_0^t1 dt2 Im(f(t1) f*(t2)).
// The lab-frame amplitude is alpha = e^{-i omega tau} alpha~.

#include <complex>
#include <string>
#include <vector>

#include "phasectx/phase_algebra.hpp"

namespace phasectx {

enum class DriveKind {
  ComplexExponential,  ///< lambda(t) = lambda0 e^{-i(omega - delta) t}
  RealCosine,          ///< lambda(t) = lambda0 cos((omega + delta) t)
};

std::string to_string(DriveKind kind);
/// "complex-exponential" or "real-cosine"; throws std::invalid_argument otherwise.
DriveKind parse_drive_kind(const std::string& name);

struct DriveProfile {
  DriveKind kind = DriveKind::ComplexExponential;
  double lambda0 = 0.0;
  double omega = 1.0;
  double delta = 0.0;

  /// Throws std::invalid_argument unless omega > 0 and all fields are finite.
  static DriveProfile make(DriveKind kind, double lambda0, double omega, double delta);

  std::complex<double> coupling(double t) const;  ///< lambda(t)
  std::complex<double> force(double t) const;     ///< lambda(t) e^{i omega t}
};

struct ForcedAmplitude {
  PhaseVec alpha_tilde;  ///< rotating frame
  PhaseVec alpha;        ///< lab frame, e^{-i omega tau} alpha_tilde
  double phi = 0.0;
  bool limit = false;  ///< delta = 0 handled by the resonant limit
};

/// Closed forms. Complex exponential: alpha~ = (lambda0/delta)(1 - e^{i delta tau}),
/// phi = (lambda0/delta)^2 (delta tau - sin delta tau). Real cosine:
///   alpha_R = -lambda0 omega sin(delta tau/2) sin((delta/2 + omega) tau) / (delta (delta/2 + omega)),
///   alpha_I = -lambda0 [(delta+omega) sin((delta+omega) tau) - omega sin(omega tau)] / (delta (delta + 2 omega)),
/// with phi from the two-tone decomposition. delta = 0 switches to the
/// resonant limit and sets `limit`. Throws std::invalid_argument for tau < 0.
ForcedAmplitude forced_amplitude(const DriveProfile& drive, double tau);

/// Exact result for f written as a sum of tones c_k e^{i nu_k t}; valid for every delta.
ForcedAmplitude tone_amplitude(const DriveProfile& drive, double tau);

/// Classical RK4 on dF/dt = f, dphi/dt = Im(f conj F), alpha~ = -i F.
/// Throws std::invalid_argument for steps < 100 or tau < 0.
ForcedAmplitude integrate_drive(const DriveProfile& drive, double tau, int steps);

/// RK4 evolution of the truncated vacuum under -i(f b^dagger + f^* b); the
/// amplitude is read off as <b> and the phase as arg <0|psi>.
ForcedAmplitude fock_drive_evolution(const DriveProfile& drive, double tau, int steps, int cutoff);

/// max(|d alpha~| / |alpha~_ref|, |d phi| / |phi_ref|); a component whose
/// reference is exactly zero contributes its absolute difference.
double relative_error(const ForcedAmplitude& value, const ForcedAmplitude& reference);

struct TraceRow {
  double tau = 0.0;
  ForcedAmplitude amplitude;
};

/// forced_amplitude at `points` equally spaced times in [0, tau_max].
std::vector<TraceRow> drive_trace(const DriveProfile& drive, double tau_max, int points);

/// CSV with header tau,alpha_re,alpha_im,alpha_tilde_re,alpha_tilde_im,phi.
std::string trace_csv(const std::vector<TraceRow>& rows);

}  // namespace phasectx
