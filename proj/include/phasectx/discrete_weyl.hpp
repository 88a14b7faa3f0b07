#pragma once

// Finite-dimensional phase space: Heisenberg-Weyl operators
// D(l,m) = Z^l X^m e^{-i pi l m / d} with exact phase bookkeeping.

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "phasectx/exec.hpp"
#include "phasectx/phase_algebra.hpp"

namespace phasectx {

/// l momentum steps, m position steps, both reduced to [0, d).
struct HWLabel {
  int l = 0;
  int m = 0;
  int d = 2;

  static HWLabel make(long long l, long long m, int d);
  friend bool operator==(const HWLabel&, const HWLabel&) = default;
};

/// exp(i pi q / d) with q taken mod 2d.
struct ExactPhase {
  int q = 0;
  int d = 2;

  static ExactPhase make(long long q, int d);
  std::complex<double> value() const;
  friend ExactPhase operator*(ExactPhase a, ExactPhase b);
  friend bool operator==(const ExactPhase&, const ExactPhase&) = default;
};

/// Phase times a reduced HW label.
struct HWWord {
  HWLabel label;
  ExactPhase phase;

  friend bool operator==(const HWWord&, const HWWord&) = default;
};

using HWTriple = std::array<HWLabel, 3>;

Eigen::MatrixXcd clock_matrix(int d);  ///< Z = diag(e^{i 2 pi n / d})
Eigen::MatrixXcd shift_matrix(int d);  ///< X|n> = |n+1 mod d>

/// Z^l X^m e^{-i pi l m / d}.
Eigen::MatrixXcd hw_matrix(const HWLabel& label);
Eigen::MatrixXcd word_matrix(const HWWord& word);

/// Exact word for unreduced integers: matrix equals Z^l X^m e^{-i pi l m / d}.
HWWord hw_word(long long l, long long m, int d);
HWWord identity_word(int d);

/// D(a) D(b) = e^{i pi (l_a m_b - m_a l_b)/d} D(a + b), reduced exactly.
/// Throws std::invalid_argument on dimension mismatch.
HWWord compose_exact(const HWWord& a, const HWWord& b);

/// l_a m_b - m_a l_b on the stored representatives.
long long symplectic(const HWLabel& a, const HWLabel& b);

/// Induced continuous amplitude sqrt(pi/d) (l - i m). With this map
/// cross(alpha_a, alpha_b) = (pi/d) * symplectic(a, b).
PhaseVec induced_amplitude(long long l, long long m, int d);

struct TripleSearch {
  int d = 0;
  /// Representatives in [0,d) with the three symplectic products equal to d/2 as integers.
  std::vector<HWTriple> exact;
  /// Products congruent to d/2 mod d.
  std::vector<HWTriple> congruent;
};

/// All ordered triples (l_i, m_i) in [0,d)^2 with
///   m2 l1 - m1 l2 = m3 l2 - m2 l3 = m1 l3 - m3 l1 = d/2
/// and l1+l2+l3 = m1+m2+m3 = 0 (mod d), in both acceptance modes.
/// Throws std::domain_error for odd d.
TripleSearch find_triples(int d, Exec exec = Exec::Parallel);

/// Full d^6 enumeration kept as the reference for find_triples.
TripleSearch find_triples_bruteforce(int d);

/// Integer representatives of the triple whose induced amplitudes satisfy
/// check_triple exactly (third label = minus the sum of the first two).
/// Empty when no such lift exists within one period of shifts. Some congruent
/// triples have none at all, e.g. (0,3), (3,0), (3,3) at d = 6.
std::optional<std::array<std::array<long long, 2>, 3>> lift_triple(const HWTriple& triple);

struct DiscreteSquare {
  int d = 0;
  std::array<std::array<Eigen::MatrixXcd, 3>, 3> ops;
  std::array<int, 6> target_signs{+1, +1, +1, +1, +1, -1};

  std::array<Eigen::MatrixXcd, 3> line(int line) const;
};

struct DiscreteSquareCheck {
  double max_commutator = 0.0;     ///< max-norm of [A,B] within lines
  double max_product_error = 0.0;  ///< max-norm of line product minus sign * identity
  double identity_error = 0.0;     ///< max-norm of R1+R2+R3+C1+C2-C3 - 6 * identity
  double mixed_state_chi = 0.0;    ///< Tr(chi)/d^2
  bool pass = false;
};

/// Two-qudit square on C^d (x) C^d in the pattern of the continuous-variable square.
/// Throws std::invalid_argument when the triple is not a congruent solution.
DiscreteSquare build_discrete_square(const HWTriple& triple, int d);
DiscreteSquareCheck check_discrete_square(const DiscreteSquare& square, double tol = 1e-12);

/// Hermitian parts (A + A^dagger)/2 and (A - A^dagger)/(2i).
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> hermitian_parts(const Eigen::MatrixXcd& a);

/// Re(A1 A2 A3) assembled from Hermitian parts as
/// (A1R A2R - A1I A2I) A3R - (A1I A2R + A1R A2I) A3I.
Eigen::MatrixXcd line_product_real(const std::array<Eigen::MatrixXcd, 3>& ops);

/// True when the triple is a congruent solution for dimension d.
bool is_congruent_triple(const HWTriple& t, int d);

}  // namespace phasectx
