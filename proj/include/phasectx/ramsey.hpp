#pragma once

// Ramsey-type modular-variable measurements: a qubit pulse, a conditional
// displacement and a second pulse, read out as Z = +-1.
//
// Steps live in the interaction picture. Free evolution between measurements
// only rotates the amplitude, so each step carries its effective alpha and
// the bare U_0 never appears in multi-step sequences.

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "phasectx/drive.hpp"
#include "phasectx/exec.hpp"
#include "phasectx/fock.hpp"
#include "phasectx/state_spec.hpp"

namespace phasectx {

struct RamseyStep {
  double phi = 0.0;        ///< total phase: pulse phase plus accumulated phase
  PhaseVec alpha_target;   ///< effective amplitude including free-evolution rotation
  double theta_mix = 0.0;  ///< b = cos(theta) a_1 + sin(theta) a_2
};

/// D_b(alpha) = D_1(alpha cos theta) D_2(alpha sin theta), exactly.
LabeledDisplacement step_displacement(const RamseyStep& step);

/// (1, e^{i phi}; -e^{-i phi}, 1) / sqrt 2.
Eigen::Matrix2cd qubit_rotation(double phi);

struct KrausPair {
  Eigen::MatrixXcd plus;
  Eigen::MatrixXcd minus;
};

/// E_+- = (1 +- e^{i phi} D(alpha)) U_0(tau) / 2 with U_0 = e^{-i tau omega n}.
/// Throws std::invalid_argument for N < 2.
KrausPair kraus_pair(double phi, PhaseVec alpha, double tau, int N, double omega = 1.0);

/// max-norm of E_+^dagger E_+ + E_-^dagger E_- - 1.
double completeness_residual(const KrausPair& k);

/// Interaction-picture Kraus operators of a step on the given modes.
std::pair<FockOperator, FockOperator> step_kraus(const RamseyStep& step, const Cutoffs& cutoffs);

/// Q = (e^{i phi} D_b + e^{-i phi} D_b^dagger) / 2.
FockOperator step_observable(const RamseyStep& step, const Cutoffs& cutoffs);

/// Completeness residual of step_kraus, evaluated on the columns given.
double step_completeness_residual(const RamseyStep& step, const Cutoffs& cutoffs, const Eigen::MatrixXcd& columns,
                                  Exec exec = Exec::Parallel);

struct MeasurementOutcome {
  double expectation = 0.0;  ///< p_+ - p_-
  double p_plus = 0.0;
  double p_minus = 0.0;
  double direct = 0.0;  ///< Tr{Q rho}
  /// Empty when the outcome has probability zero.
  std::optional<FockState> conditioned_plus;
  std::optional<FockState> conditioned_minus;
};

MeasurementOutcome single_measurement(const FockState& state, const RamseyStep& step, Exec exec = Exec::Parallel);

class NonCommutingSteps : public std::invalid_argument {
 public:
  NonCommutingSteps(int first, int second, double phase);
  int first() const { return first_; }
  int second() const { return second_; }
  double phase() const { return phase_; }

 private:
  int first_;
  int second_;
  double phase_;
};

struct SequenceResult {
  double correlation = 0.0;  ///< <Z_1 Z_2 Z_3> from the eight outcome branches
  double trace_value = 0.0;  ///< Re Tr{Q_1 Q_2 Q_3 rho}
  double trace_imag = 0.0;
  /// Branch b has outcome - on step k when bit k of b is set.
  std::array<double, 8> branch_probabilities{};
  double tail_mass = 0.0;
  bool truncation_warning = false;

  double residual() const { return std::abs(correlation - trace_value); }
};

/// Throws NonCommutingSteps when a pair of effective displacements has a
/// commutation phase away from 0 mod 2 pi by more than kTolPhase.
SequenceResult sequence_correlation(const FockState& state, const std::array<RamseyStep, 3>& steps,
                                    Exec exec = Exec::Parallel);

/// <Z_1 ... Z_n> by branch bookkeeping, no commutation check. Fills the 2^n
/// branch probabilities when `probabilities` is non-null.
double branch_correlation(const FockState& state, const std::vector<RamseyStep>& steps,
                          std::vector<double>* probabilities = nullptr, Exec exec = Exec::Parallel);

/// Tr{Q_1 ... Q_n rho}.
std::complex<double> trace_correlation(const FockState& state, const std::vector<RamseyStep>& steps,
                                       Exec exec = Exec::Parallel);

struct SampledCorrelation {
  double mean = 0.0;
  double standard_error = 0.0;
  std::int64_t shots = 0;
};

/// Seeded finite-shot estimate of the product of outcomes.
SampledCorrelation sample_correlation(const std::vector<double>& branch_probabilities, std::int64_t shots,
                                      std::uint64_t seed);

/// Three steps at theta = pi/4 with effective amplitudes
/// sqrt2 a, sqrt2 a e^{i 2pi/3}, sqrt2 a e^{-i 2pi/3}.
std::array<RamseyStep, 3> c3_steps(double alpha_mag, double phi1, double phi2, double phi3);

struct C3Result {
  double value = 0.0;
  /// Correlations at phases (0,0,0), (pi/2,pi/2,0), (pi/2,0,pi/2), (0,pi/2,pi/2).
  std::array<double, 4> correlations{};
};

/// c(0,0,0) - c(pi/2,pi/2,0) - c(pi/2,0,pi/2) - c(0,pi/2,pi/2), the measured
/// value of Re(A_1 A_2 A_3) on the third column. Steps are not required to commute.
C3Result c3_protocol(double alpha_mag, const FockState& state, Exec exec = Exec::Parallel);

struct SequenceConfig {
  std::vector<RamseyStep> steps;
  StateSpec state = vacuum_spec(2);
  int cutoff = 32;
};

/// {"steps": [...], "state": <state spec>, "cutoff": N}. A step is either
/// {"phi", "alpha": [re, im], "theta_mix"} or
/// {"drive": {"kind", "lambda0", "omega", "delta"}, "tau", "t", "phi_pulse", "theta_mix"},
/// the latter giving alpha = alpha(tau) e^{i omega t} and phi = phi_pulse + phi(tau).
SequenceConfig parse_sequence_config(const nlohmann::json& j);

/// Step produced by a drive of duration tau read out after a further free evolution t.
RamseyStep step_from_drive(const DriveProfile& drive, double tau, double t, double phi_pulse, double theta_mix);

}  // namespace phasectx
