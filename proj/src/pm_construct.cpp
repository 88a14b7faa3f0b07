#include "phasectx/pm_construct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace phasectx {

using std::numbers::pi;

std::string line_name(int line) {
  static const char* names[] = {"R1", "R2", "R3", "C1", "C2", "C3"};
  return names[line];
}

std::array<LabeledDisplacement, 3> PMSquareSpec::line(int line) const {
  if (line < 3) return entries[line];
  const int k = line - 3;
  return {entries[0][k], entries[1][k], entries[2][k]};
}

namespace {

std::string describe(const TripleViolated& v) {
  std::ostringstream os;
  os << "amplitudes fail the pi/2 cross condition: residuals (" << v.residuals[0] << ", "
     << v.residuals[1] << ", " << v.residuals[2] << "), closure " << v.closure;
  return os.str();
}

}  // namespace

TripleRejected::TripleRejected(TripleViolated v)
    : std::invalid_argument(describe(v)), violation_(v) {}

PMSquareSpec build_cv_square(PhaseVec a1, PhaseVec a2, PhaseVec a3) {
  const TripleCheck check = check_triple(a1, a2, a3);
  if (auto* v = std::get_if<TripleViolated>(&check)) throw TripleRejected(*v);

  using LD = LabeledDisplacement;
  PMSquareSpec sq;
  sq.entries = {{
      {LD::single(kModeA, -a1), LD::single(kModeB, -a1), LD::pair(kModeA, a1, kModeB, a1)},
      {LD::single(kModeB, -a2), LD::single(kModeA, -a2), LD::pair(kModeA, a2, kModeB, a2)},
      {LD::pair(kModeA, a1, kModeB, a2), LD::pair(kModeA, a2, kModeB, a1),
       LD::pair(kModeA, a3, kModeB, a3)},
  }};
  sq.target_signs = {+1, +1, +1, +1, +1, -1};
  return sq;
}

ValidationReport validate_square(const PMSquareSpec& spec, double tol) {
  ValidationReport report;
  int sign_product = 1;
  bool all = true;
  for (int l = 0; l < kLineCount; ++l) {
    const auto ops = spec.line(l);
    LineReport& lr = report.lines[l];
    lr.commutation_phases = {reduce_phase(commutation_phase(ops[0], ops[1])),
                             reduce_phase(commutation_phase(ops[1], ops[2])),
                             reduce_phase(commutation_phase(ops[0], ops[2]))};
    lr.commute = std::all_of(lr.commutation_phases.begin(), lr.commutation_phases.end(),
                             [&](double c) { return std::abs(c) <= tol; });
    const LabeledDisplacement product = ops[0] * ops[1] * ops[2];
    lr.amplitude_residual = product.max_amplitude();
    lr.product_phase = product.phase();
    lr.expected_phase = spec.target_signs[l] > 0 ? 0.0 : pi;
    lr.phase_residual = phase_distance(lr.product_phase, lr.expected_phase);
    lr.pass = lr.commute && lr.amplitude_residual <= tol && lr.phase_residual <= tol;
    all = all && lr.pass;
    sign_product *= spec.target_signs[l];
  }
  report.sign_product_negative = sign_product < 0;
  report.pass = all && report.sign_product_negative;
  return report;
}

bool single_mode_identity(const std::array<std::int64_t, 6>& k) {
  return line_form(k[0], k[1], k[2]) == line_form(k[3], k[4], k[5]);
}

double min_single_mode_amplitude() { return std::sqrt(2.0 * pi); }

double SingleModeLayout::max_length() const { return std::sqrt(2.0) * ell; }

namespace {

int nearest_odd(double x) {
  // odd integers are 2n+1; nearest n to (x-1)/2
  const double n = std::round((x - 1.0) / 2.0);
  return static_cast<int>(2.0 * n + 1.0);
}

}  // namespace

SingleModeLayout approx_single_mode(double max_amplitude) {
  if (!(max_amplitude >= min_single_mode_amplitude())) {
    std::ostringstream os;
    os << "max_amplitude " << max_amplitude << " is infeasible; the smallest layout needs L = sqrt(2 pi) = "
       << min_single_mode_amplitude();
    throw std::domain_error(os.str());
  }
  const double ratio = std::sqrt(3.0 / 4.0);
  const int s_max = static_cast<int>(std::floor(max_amplitude * max_amplitude / (2.0 * pi)));

  int best_s = 1;
  int best_r = 1;
  double best_dev = std::numeric_limits<double>::infinity();
  for (int s = 1; s <= s_max; s += 2) {
    if (std::sqrt(2.0 * pi * s) > max_amplitude) break;
    const int r = nearest_odd(s * ratio);
    const double dev = std::abs(s * ratio - r);
    if (dev < best_dev) {  // strict: ties keep the smaller s
      best_dev = dev;
      best_s = s;
      best_r = r;
    }
  }

  SingleModeLayout out;
  out.s = best_s;
  out.r = best_r;
  out.ell = std::sqrt(best_s * pi);
  const double l = out.ell;
  const std::array<PhaseVec, 3> first{PhaseVec{0.0, l}, PhaseVec{-l, 0.0}, PhaseVec{l, -l}};
  for (int row = 0; row < 3; ++row) {
    const double angle = 2.0 * pi * row / 3.0;
    const PhaseVec v1 = row == 0 ? first[0] : first[0].rotated(angle);
    const PhaseVec v2 = row == 0 ? first[1] : first[1].rotated(angle);
    out.vectors[row] = {v1, v2, -v1 - v2};
  }

  out.k_ideal = {best_s, best_s, best_s, best_r, best_r, 2 * best_r};
  for (int line = 0; line < kLineCount; ++line) {
    std::array<PhaseVec, 3> v;
    if (line < 3) {
      v = out.vectors[line];
    } else {
      const int k = line - 3;
      v = {out.vectors[0][k], out.vectors[1][k], out.vectors[2][k]};
    }
    out.k_values[line] = std::abs(cross(v[0], v[1])) / pi;
    out.deviations[line] = out.k_values[line] - out.k_ideal[line];
  }
  return out;
}

PMSquareSpec to_square(const SingleModeLayout& layout, int mode) {
  PMSquareSpec sq;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) sq.entries[j][k] = LabeledDisplacement::single(mode, layout.vectors[j][k]);
  sq.target_signs = layout.target_signs;
  return sq;
}

}  // namespace phasectx
