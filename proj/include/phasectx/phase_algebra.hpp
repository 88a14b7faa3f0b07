#pragma once

// Exact algebra of displacement-operator words e^{i phase} (x)_m D_m(alpha_m).
//
// Amplitudes are treated as real 2-vectors (Re alpha, Im alpha). Composition
// follows D(a)D(b) = e^{i cross(a,b)} D(a+b) with cross(a,b) = Im{a conj(b)}.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <variant>

namespace phasectx {

/// Tolerance for comparing phases against 0, +-pi/2 and pi.
inline constexpr double kTolPhase = 1e-9;

struct PhaseVec {
  double re = 0.0;
  double im = 0.0;

  constexpr PhaseVec() = default;
  constexpr PhaseVec(double r, double i) : re(r), im(i) {}

  /// Throws std::invalid_argument on NaN/Inf components.
  static PhaseVec checked(double re, double im);
  static PhaseVec from_complex(std::complex<double> z) { return {z.real(), z.imag()}; }
  static PhaseVec polar(double length, double angle) {
    return {length * std::cos(angle), length * std::sin(angle)};
  }

  std::complex<double> complex() const { return {re, im}; }
  double norm() const { return std::hypot(re, im); }
  bool is_finite() const { return std::isfinite(re) && std::isfinite(im); }
  bool is_zero() const { return re == 0.0 && im == 0.0; }

  PhaseVec rotated(double angle) const;

  friend constexpr PhaseVec operator+(PhaseVec a, PhaseVec b) { return {a.re + b.re, a.im + b.im}; }
  friend constexpr PhaseVec operator-(PhaseVec a, PhaseVec b) { return {a.re - b.re, a.im - b.im}; }
  friend constexpr PhaseVec operator-(PhaseVec a) { return {-a.re, -a.im}; }
  friend constexpr PhaseVec operator*(double s, PhaseVec a) { return {s * a.re, s * a.im}; }
  friend constexpr bool operator==(PhaseVec a, PhaseVec b) = default;
};

/// Im{a conj(b)} = a.im*b.re - a.re*b.im. Antisymmetric; this is the negative
/// of the usual 2D determinant.
constexpr double cross(PhaseVec a, PhaseVec b) { return a.im * b.re - a.re * b.im; }

/// Reduces an angle to (-pi, pi].
double reduce_phase(double angle);

/// Distance of `angle` from `target` on the circle, in [0, pi].
double phase_distance(double angle, double target);

/// A multi-mode displacement word with an accumulated scalar phase.
/// Modes that are absent carry zero amplitude; zero amplitudes are never stored.
class LabeledDisplacement {
 public:
  LabeledDisplacement() = default;
  explicit LabeledDisplacement(std::map<int, PhaseVec> amplitudes, double phase = 0.0);

  static LabeledDisplacement single(int mode, PhaseVec amplitude, double phase = 0.0);
  static LabeledDisplacement pair(int mode_a, PhaseVec a, int mode_b, PhaseVec b);

  PhaseVec amplitude(int mode) const;
  const std::map<int, PhaseVec>& amplitudes() const { return amplitudes_; }
  double phase() const { return phase_; }

  /// True when every amplitude is zero, i.e. the word is a pure scalar.
  bool is_scalar() const { return amplitudes_.empty(); }
  /// Largest amplitude norm over all modes.
  double max_amplitude() const;

  /// Same amplitudes with the scalar phase replaced.
  LabeledDisplacement with_phase(double phase) const;

  friend bool operator==(const LabeledDisplacement&, const LabeledDisplacement&) = default;

 private:
  std::map<int, PhaseVec> amplitudes_;
  double phase_ = 0.0;
};

/// Product d1 * d2 with the geometric phase sum over modes of cross(d1[m], d2[m]).
LabeledDisplacement compose(const LabeledDisplacement& d1, const LabeledDisplacement& d2);

inline LabeledDisplacement operator*(const LabeledDisplacement& a, const LabeledDisplacement& b) {
  return compose(a, b);
}

/// Inverse word: D^{-1} = e^{-i phase} D(-alpha).
LabeledDisplacement inverse(const LabeledDisplacement& d);

/// Phase c in d1 d2 = e^{i c} d2 d1, i.e. 2 * sum over modes of cross(d1[m], d2[m]).
double commutation_phase(const LabeledDisplacement& d1, const LabeledDisplacement& d2);

/// True when commutation_phase is 0 mod 2 pi within `tol`.
bool commutes(const LabeledDisplacement& d1, const LabeledDisplacement& d2, double tol = kTolPhase);

struct TripleSatisfied {
  int sign = +1;  ///< common sign s of the three crosses s*pi/2
};

struct TripleViolated {
  /// cross(a1,a2), cross(a2,a3), cross(a3,a1) minus s*pi/2 for the sign s of cross(a1,a2).
  std::array<double, 3> residuals{};
  /// |a1 + a2 + a3|.
  double closure = 0.0;
};

using TripleCheck = std::variant<TripleSatisfied, TripleViolated>;

/// Checks cross(a1,a2) = cross(a2,a3) = cross(a3,a1) = s*pi/2 for a common
/// sign s, together with the implied closure a1 + a2 + a3 = 0.
TripleCheck check_triple(PhaseVec a1, PhaseVec a2, PhaseVec a3, double tol = kTolPhase);

inline bool satisfied(const TripleCheck& c) { return std::holds_alternative<TripleSatisfied>(c); }

/// Equal-length triple |a_i| = sqrt(pi/sqrt 3), successive rotations by 2 pi/3,
/// starting at angle `start`. Its crosses are all -pi/2.
std::array<PhaseVec, 3> symmetric_triple(double start = 0.0);

/// |alpha| of the symmetric triple: sqrt(pi / sqrt(3)) ~ 1.3467.
inline double symmetric_length() { return std::sqrt(std::numbers::pi / std::sqrt(3.0)); }

}  // namespace phasectx
