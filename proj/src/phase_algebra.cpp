#include "phasectx/phase_algebra.hpp"

#include <algorithm>
#include <stdexcept>

namespace phasectx {

using std::numbers::pi;

PhaseVec PhaseVec::checked(double re, double im) {
  PhaseVec v{re, im};
  if (!v.is_finite()) throw std::invalid_argument("PhaseVec: non-finite component");
  return v;
}

PhaseVec PhaseVec::rotated(double angle) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * re - s * im, s * re + c * im};
}

double reduce_phase(double angle) {
  double r = std::remainder(angle, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

double phase_distance(double angle, double target) {
  return std::abs(reduce_phase(angle - target));
}

LabeledDisplacement::LabeledDisplacement(std::map<int, PhaseVec> amplitudes, double phase)
    : amplitudes_(std::move(amplitudes)), phase_(reduce_phase(phase)) {
  if (!std::isfinite(phase)) throw std::invalid_argument("LabeledDisplacement: non-finite phase");
  std::erase_if(amplitudes_, [](const auto& kv) {
    if (!kv.second.is_finite()) throw std::invalid_argument("LabeledDisplacement: non-finite amplitude");
    return kv.second.is_zero();
  });
}

LabeledDisplacement LabeledDisplacement::single(int mode, PhaseVec amplitude, double phase) {
  return LabeledDisplacement({{mode, amplitude}}, phase);
}

LabeledDisplacement LabeledDisplacement::pair(int mode_a, PhaseVec a, int mode_b, PhaseVec b) {
  if (mode_a == mode_b) return single(mode_a, a) * single(mode_b, b);
  return LabeledDisplacement({{mode_a, a}, {mode_b, b}});
}

PhaseVec LabeledDisplacement::amplitude(int mode) const {
  auto it = amplitudes_.find(mode);
  return it == amplitudes_.end() ? PhaseVec{} : it->second;
}

double LabeledDisplacement::max_amplitude() const {
  double m = 0.0;
  for (const auto& [mode, a] : amplitudes_) m = std::max(m, a.norm());
  return m;
}

LabeledDisplacement LabeledDisplacement::with_phase(double phase) const {
  return LabeledDisplacement(amplitudes_, phase);
}

LabeledDisplacement compose(const LabeledDisplacement& d1, const LabeledDisplacement& d2) {
  std::map<int, PhaseVec> amps = d1.amplitudes();
  double phase = d1.phase() + d2.phase();
  for (const auto& [mode, b] : d2.amplitudes()) {
    const PhaseVec a = d1.amplitude(mode);
    phase += cross(a, b);
    amps[mode] = a + b;
  }
  return LabeledDisplacement(std::move(amps), phase);
}

LabeledDisplacement inverse(const LabeledDisplacement& d) {
  std::map<int, PhaseVec> amps;
  for (const auto& [mode, a] : d.amplitudes()) amps[mode] = -a;
  return LabeledDisplacement(std::move(amps), -d.phase());
}

double commutation_phase(const LabeledDisplacement& d1, const LabeledDisplacement& d2) {
  double c = 0.0;
  for (const auto& [mode, a] : d1.amplitudes()) c += cross(a, d2.amplitude(mode));
  return 2.0 * c;
}

bool commutes(const LabeledDisplacement& d1, const LabeledDisplacement& d2, double tol) {
  return phase_distance(commutation_phase(d1, d2), 0.0) <= tol;
}

TripleCheck check_triple(PhaseVec a1, PhaseVec a2, PhaseVec a3, double tol) {
  const std::array<double, 3> crosses{cross(a1, a2), cross(a2, a3), cross(a3, a1)};
  const int sign = crosses[0] < 0.0 ? -1 : +1;
  TripleViolated v;
  v.closure = (a1 + a2 + a3).norm();
  bool ok = v.closure <= tol;
  for (std::size_t i = 0; i < 3; ++i) {
    v.residuals[i] = crosses[i] - sign * pi / 2.0;
    ok = ok && std::abs(v.residuals[i]) <= tol;
  }
  if (ok) return TripleSatisfied{sign};
  return v;
}

std::array<PhaseVec, 3> symmetric_triple(double start) {
  const PhaseVec a1 = PhaseVec::polar(symmetric_length(), start);
  const PhaseVec a2 = a1.rotated(2.0 * pi / 3.0);
  return {a1, a2, -a1 - a2};
}

}  // namespace phasectx
