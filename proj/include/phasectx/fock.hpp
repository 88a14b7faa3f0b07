#pragma once

// Truncated Fock-space numerics.
//
// Basis index is n_0 + N_0 (n_1 + N_1 (n_2 + ...)): mode 0 varies fastest.
// Operators are sums of tensor-product terms with dense per-mode factors, so a
// two-mode operator at N = 64 never materialises its 4096 x 4096 matrix
// unless dense() is called.

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

#include "phasectx/exec.hpp"
#include "phasectx/phase_algebra.hpp"
#include "phasectx/pm_construct.hpp"
#include "phasectx/state_spec.hpp"

namespace phasectx {

/// Tail mass above which a state counts as too close to the cutoff.
inline constexpr double kTailWarning = 1e-10;

Eigen::Index dimension_of(const Cutoffs& cutoffs);

class FockOperator {
 public:
  /// Null means identity on that mode.
  using Factor = std::shared_ptr<const Eigen::MatrixXcd>;

  struct Term {
    std::complex<double> coeff;
    std::vector<Factor> factors;
  };

  /// Zero operator. Throws std::invalid_argument unless every cutoff is >= 1.
  explicit FockOperator(Cutoffs cutoffs);

  static FockOperator identity(Cutoffs cutoffs);
  /// `factor` on `mode`, identity elsewhere.
  static FockOperator on_mode(Cutoffs cutoffs, int mode, Eigen::MatrixXcd factor);
  static FockOperator product(Cutoffs cutoffs, std::complex<double> coeff, std::vector<Factor> factors);

  const Cutoffs& cutoffs() const { return cutoffs_; }
  int mode_count() const { return static_cast<int>(cutoffs_.size()); }
  Eigen::Index dimension() const { return dimension_of(cutoffs_); }
  const std::vector<Term>& terms() const { return terms_; }

  FockOperator adjoint() const;
  Eigen::MatrixXcd dense() const;

  /// Applies the operator to each column.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& columns, Exec exec = Exec::Parallel) const;

  friend FockOperator operator+(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator-(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator*(std::complex<double> s, const FockOperator& a);
  friend FockOperator operator*(const FockOperator& a, const FockOperator& b);

 private:
  Cutoffs cutoffs_;
  std::vector<Term> terms_;
};

/// Applies `factor` to `mode` of every column in place.
void apply_mode_factor(const Eigen::MatrixXcd& factor, int mode, const Cutoffs& cutoffs,
                       Eigen::MatrixXcd& columns, Exec exec);

/// Mixture sum_k w_k |psi_k><psi_k| with unit-norm components stored as columns.
class FockState {
 public:
  /// Throws std::invalid_argument unless the norm is 1 within 1e-10.
  static FockState pure(Cutoffs cutoffs, Eigen::VectorXcd amplitudes);
  /// Normalises first; throws on a zero vector.
  static FockState normalized(Cutoffs cutoffs, Eigen::VectorXcd amplitudes);
  /// Weights must be non-negative and sum to 1 within 1e-10.
  static FockState mixture(Cutoffs cutoffs, std::vector<double> weights, Eigen::MatrixXcd components);
  /// Requires a Hermitian, unit-trace, positive semidefinite matrix (1e-10).
  static FockState from_density(Cutoffs cutoffs, const Eigen::MatrixXcd& rho);

  const Cutoffs& cutoffs() const { return cutoffs_; }
  int mode_count() const { return static_cast<int>(cutoffs_.size()); }
  Eigen::Index dimension() const { return components_.rows(); }
  const std::vector<double>& weights() const { return weights_; }
  const Eigen::MatrixXcd& components() const { return components_; }
  bool is_pure() const { return weights_.size() == 1; }

  Eigen::MatrixXcd density() const;
  /// Marginal level populations of one mode.
  std::vector<double> populations(int mode) const;
  /// Highest level with population above 1e-16, plus one.
  int support(int mode) const;
  double mass_at_or_above(int mode, int level) const;
  /// Largest over modes of the mass at levels >= N_m / 2.
  double tail_mass() const;
  bool truncation_safe() const { return tail_mass() <= kTailWarning; }

  /// Zero-padded copy in larger cutoffs. Throws if support does not fit.
  FockState embedded(const Cutoffs& larger) const;

  std::complex<double> expectation(const FockOperator& op, Exec exec = Exec::Parallel) const;

 private:
  FockState(Cutoffs cutoffs, std::vector<double> weights, Eigen::MatrixXcd components);

  Cutoffs cutoffs_;
  std::vector<double> weights_;
  Eigen::MatrixXcd components_;
};

Eigen::MatrixXcd annihilation_matrix(int N);
/// diag(e^{i phi n}).
Eigen::MatrixXcd number_phase(double phi, int N);

/// exp(alpha a^dagger - alpha^* a) of the truncated generator. Computed as
/// R V diag(e^{i|alpha| x}) V^T R^dagger from the eigensystem of the real
/// tridiagonal quadrature a + a^dagger, with R = diag(e^{i(theta - pi/2) n}).
/// Unitary to rounding. Throws std::invalid_argument for N < 2.
Eigen::MatrixXcd displacement_matrix(PhaseVec alpha, int N);

/// Matrix elements of the untruncated operator via associated Laguerre
/// polynomials, cut to N x N. Not unitary; cross-validation only.
Eigen::MatrixXcd displacement_matrix_analytic(PhaseVec alpha, int N);

/// e^{i phase} (x)_m D_m(alpha_m). Throws if the word uses a mode >= cutoffs.size().
FockOperator displacement_operator(const LabeledDisplacement& word, const Cutoffs& cutoffs);

/// A_R = (op + op^dagger)/2, A_I = (op - op^dagger)/(2i).
std::pair<FockOperator, FockOperator> modular_parts(const FockOperator& op);

/// Re(A1 A2 A3) applied to columns, assembled as
///   A1R (A2R A3R - A2I A3I) - A1I (A2I A3R + A2R A3I).
Eigen::MatrixXcd line_apply(const std::array<LabeledDisplacement, 3>& line, const Cutoffs& cutoffs,
                            const Eigen::MatrixXcd& columns, Exec exec = Exec::Parallel);

/// sum_l target_sign_l * line_l applied to columns.
Eigen::MatrixXcd chi_apply(const PMSquareSpec& square, const Cutoffs& cutoffs, const Eigen::MatrixXcd& columns,
                           Exec exec = Exec::Parallel);

/// <Re(A1 A2 A3)> without any validation of the line.
double line_expectation(const std::array<LabeledDisplacement, 3>& line, const FockState& state,
                        Exec exec = Exec::Parallel);

struct ChiEvaluation {
  double value = 0.0;
  std::array<double, 6> line_values{};  ///< unsigned line expectations
  double tail_mass = 0.0;
  bool truncation_warning = false;  ///< tail_mass > kTailWarning
};

/// <sum_l s_l Re(A_l1 A_l2 A_l3)> for a validated square. Throws
/// std::invalid_argument if the square fails validate_square or the state
/// does not have two modes.
ChiEvaluation chi_pm_expectation(const PMSquareSpec& square, const FockState& state, Exec exec = Exec::Parallel);

struct ConvergenceRow {
  int cutoff = 0;
  double chi = 0.0;
  double deviation = 0.0;  ///< |chi - 6|
  double tail_mass = 0.0;
  bool truncation_warning = false;
};

/// chi at each cutoff (same N on every mode). Cutoffs must be strictly
/// increasing; a state that does not fit a cutoff raises std::invalid_argument.
std::vector<ConvergenceRow> convergence_scan(const PMSquareSpec& square, const StateSpec& state,
                                             const std::vector<int>& cutoffs, Exec exec = Exec::Parallel);

}  // namespace phasectx
