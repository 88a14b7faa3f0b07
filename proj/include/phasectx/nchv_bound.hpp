#pragma once

// Noncontextual hidden-variable side of the phase-space PM expression.
//
// Classical values x_i, y_i stand for the real and imaginary modular parts of
// square entry (j, k), stored at index i = 3k + j (0-based). Each line value
// is Re(a_p a_q a_r) with a = x + i y, and
//   F = R1 + R2 + R3 + C1 + C2 - C3.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "phasectx/exec.hpp"

namespace phasectx {

inline constexpr int kCells = 9;

constexpr int cell_index(int row, int col) { return 3 * col + row; }

/// Cell indices of each line, rows then columns.
const std::array<std::array<int, 3>, 6>& line_cells();
/// Sign of each line in F.
inline constexpr std::array<double, 6> kLineSigns{+1, +1, +1, +1, +1, -1};

struct AssignmentVector {
  std::array<double, kCells> x{};
  std::array<double, kCells> y{};

  /// Components in [-1, 1] (the cube S).
  bool in_cube() const;
  /// x_i^2 + y_i^2 <= 1 for all i (the region B), with 1e-12 slack so
  /// points placed on the unit circle by rounding still count.
  bool in_ball() const;
  double radius_sq(int i) const { return x[i] * x[i] + y[i] * y[i]; }

  static AssignmentVector from_angles(const std::array<double, kCells>& theta);
  static AssignmentVector uniform_cube(std::mt19937_64& rng);
};

/// Six line values Re(a_p a_q a_r), without the C3 sign.
std::array<double, 6> line_values(const AssignmentVector& X);

double eval_F(const AssignmentVector& X);

/// F - lambda * sum_i |x_i^2 + y_i^2 - 1|.
double eval_punished(const AssignmentVector& X, double lambda);

/// Analytic gradient of F: (dF/dx, dF/dy).
AssignmentVector grad_F(const AssignmentVector& X);

/// Signed sum of the two line values containing cell i (row + column, C3 negated).
double cell_line_sum(const AssignmentVector& X, int i);

struct VertexMax {
  double value = 0.0;
  AssignmentVector witness;
};

/// Max of F over all 2^18 vertices of [-1,1]^18 (the answer is 12).
VertexMax vertex_max_F(Exec exec = Exec::Parallel);
/// Max over the 2^9 vertices with y = 0 (the +-1 assignment bound, 4).
VertexMax vertex_max_F_real(Exec exec = Exec::Parallel);
/// Max over the 2^9 vertices with x = 0.
VertexMax vertex_max_F_imag(Exec exec = Exec::Parallel);

struct OptimumResult {
  double value = 0.0;
  AssignmentVector argmax;
  int restarts = 0;
};

/// Max of F on the torus x_i = cos t_i, y_i = sin t_i by multistart gradient
/// ascent with backtracking. Converges to 3 sqrt 3.
OptimumResult constrained_max(int restarts, std::uint64_t seed, Exec exec = Exec::Parallel);

/// Local ascent on the torus from a given start; exposed for tests.
OptimumResult torus_ascent(std::array<double, kCells> theta);

/// Unchecked maximiser of the punished expression over the cube, any lambda >= 0.
/// Multistart block-coordinate ascent: each cell's (x_i, y_i) subproblem is
/// solved exactly over its square, which handles the kink on the unit circle.
OptimumResult maximize_punished(double lambda, int restarts, std::uint64_t seed,
                                Exec exec = Exec::Parallel);

struct SampleMax {
  double value = 0.0;
  AssignmentVector argmax;
  std::int64_t samples = 0;
};

/// Max of eval_punished over `samples` uniform cube points.
SampleMax sample_punished_max(double lambda, std::int64_t samples, std::uint64_t seed,
                              Exec exec = Exec::Parallel);

struct PunishedMax {
  double value = 0.0;  ///< best of optimiser and sampling
  OptimumResult optimiser;
  SampleMax sampling;
};

/// Classical bound of the punished expression. Refuses lambda < 2 with
/// std::domain_error: the 3 sqrt 3 bound is only established there.
PunishedMax punished_max(double lambda, std::int64_t samples, int restarts, std::uint64_t seed = 2024,
                         Exec exec = Exec::Parallel);

/// Largest radial derivative of the punished expression over the cells with
/// x_i^2 + y_i^2 > 1:
///   (R_i + C_i)/sqrt(x_i^2+y_i^2) - 2 lambda sqrt(x_i^2+y_i^2).
/// Throws std::invalid_argument when no cell lies outside the unit disk.
double directional_derivative_check(const AssignmentVector& X, double lambda);

/// The same quantity from grad(F) . X_i/|X_i| minus the punishment slope.
double radial_derivative_from_gradient(const AssignmentVector& X, double lambda, int cell);

struct DirectionalSweep {
  double max_derivative = 0.0;
  AssignmentVector worst;
  std::int64_t points = 0;
};

/// Evaluates directional_derivative_check at `points` uniform cube samples
/// that have at least one cell outside the unit disk.
DirectionalSweep directional_sweep(double lambda, std::int64_t points, std::uint64_t seed,
                                   Exec exec = Exec::Parallel);

/// 3 sqrt(3).
inline double classical_bound() { return 3.0 * std::sqrt(3.0); }

}  // namespace phasectx
