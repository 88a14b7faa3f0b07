#pragma once

// Peres-Mermin squares built from displacement words: the two-mode
// continuous-variable square, its symbolic validation, the single-mode
// obstruction search and the large-displacement single-mode approximation.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "phasectx/exec.hpp"
#include "phasectx/phase_algebra.hpp"

namespace phasectx {

/// Mode labels used by the two-mode square.
inline constexpr int kModeA = 0;
inline constexpr int kModeB = 1;

/// Lines are numbered 0..2 for rows and 3..5 for columns.
inline constexpr int kLineCount = 6;
std::string line_name(int line);

struct PMSquareSpec {
  std::array<std::array<LabeledDisplacement, 3>, 3> entries;
  /// Intended scalar of each line product, rows then columns.
  std::array<int, 6> target_signs{+1, +1, +1, +1, +1, -1};

  std::array<LabeledDisplacement, 3> line(int line) const;
};

/// Thrown by build_cv_square when the amplitudes fail check_triple.
class TripleRejected : public std::invalid_argument {
 public:
  explicit TripleRejected(TripleViolated v);
  const TripleViolated& violation() const { return violation_; }

 private:
  TripleViolated violation_;
};

/// Two-mode square:
///
///   D1(-a1)        D2(-a1)        D1(a1)D2(a1)
///   D2(-a2)        D1(-a2)        D1(a2)D2(a2)
///   D1(a1)D2(a2)   D1(a2)D2(a1)   D1(a3)D2(a3)
///
/// with target signs (+,+,+,+,+,-).
PMSquareSpec build_cv_square(PhaseVec a1, PhaseVec a2, PhaseVec a3);

struct LineReport {
  std::array<double, 3> commutation_phases{};  ///< (0,1), (1,2), (0,2), reduced to (-pi, pi]
  bool commute = false;
  double amplitude_residual = 0.0;  ///< largest per-mode amplitude of the product
  double product_phase = 0.0;       ///< scalar phase of the product, reduced
  double expected_phase = 0.0;      ///< 0 for sign +1, pi for sign -1
  double phase_residual = 0.0;      ///< circular distance product vs expected
  bool pass = false;
};

struct ValidationReport {
  std::array<LineReport, 6> lines{};
  bool sign_product_negative = false;  ///< product of the six target signs is -1
  bool pass = false;
};

ValidationReport validate_square(const PMSquareSpec& spec, double tol = kTolPhase);

/// (k1-k2)^2+(k1-k3)^2+(k2-k3)^2-k1^2-k2^2-k3^2 == same form in k4..k6.
bool single_mode_identity(const std::array<std::int64_t, 6>& k);

/// Quadratic form (a-b)^2+(a-c)^2+(b-c)^2-a^2-b^2-c^2.
constexpr std::int64_t line_form(std::int64_t a, std::int64_t b, std::int64_t c) {
  return (a - b) * (a - b) + (a - c) * (a - c) + (b - c) * (b - c) - a * a - b * b - c * c;
}

/// Parity pattern: odd[i] says whether k_{i+1} must be odd.
using ParityPattern = std::array<bool, 6>;

/// Exhaustive count of k in [-K,K]^6 with the given parities satisfying the
/// identity. Brute-force six-fold loop (serial reference or OpenMP).
std::int64_t count_identity_solutions(const ParityPattern& pattern, int K, Exec exec);

/// Same count via meet-in-the-middle over the two three-index halves.
std::int64_t count_identity_solutions_split(const ParityPattern& pattern, int K);

struct PatternCount {
  ParityPattern pattern{};
  std::int64_t tuples = 0;
  std::int64_t solutions = 0;
};

struct ObstructionReport {
  int K = 0;
  /// k1..k5 even, k6 odd (the pattern induced by the two-mode square).
  PatternCount square_pattern;
  /// All twenty three-even/three-odd placements.
  std::vector<PatternCount> three_three;
  /// All-even control pattern; solutions exist (e.g. the zero tuple).
  PatternCount all_even;

  bool no_solution() const;
};

ObstructionReport obstruction_search(int K, Exec exec = Exec::Parallel);

struct SingleModeLayout {
  std::array<std::array<PhaseVec, 3>, 3> vectors{};
  double ell = 0.0;  ///< base length, sqrt(s pi)
  int r = 0;         ///< odd integer approximating s sqrt(3/4)
  int s = 0;         ///< odd integer, rows carry k = s
  /// Achieved |cross|/pi per line (rows then columns).
  std::array<double, 6> k_values{};
  /// Ideal integers per line: s, s, s, r, r, 2r.
  std::array<int, 6> k_ideal{};
  /// k_values - k_ideal.
  std::array<double, 6> deviations{};
  /// Target line signs: five -1 and one +1 (last column).
  std::array<int, 6> target_signs{-1, -1, -1, -1, -1, +1};

  double max_length() const;  ///< L = sqrt(2) ell
};

/// Smallest admissible displacement budget: sqrt(2 pi).
double min_single_mode_amplitude();

/// Best odd (s, r) with L = sqrt(2 pi s) <= max_amplitude. Throws
/// std::domain_error below min_single_mode_amplitude().
SingleModeLayout approx_single_mode(double max_amplitude);

/// The layout as single-mode words with its own target signs.
PMSquareSpec to_square(const SingleModeLayout& layout, int mode = kModeA);

}  // namespace phasectx
