#include "phasectx/ramsey.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace phasectx {

using Eigen::MatrixXcd;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

// Probability below which an outcome is treated as impossible.
constexpr double kZeroProbability = 1e-14;

void require_steps(const std::vector<RamseyStep>& steps) {
  if (steps.empty()) throw std::invalid_argument("at least one step is required");
}

FockOperator step_unitary(const RamseyStep& step, const Cutoffs& cutoffs) {
  return displacement_operator(step_displacement(step).with_phase(step.phi), cutoffs);
}

double weighted_norm_sq(const FockState& s, const MatrixXcd& cols) {
  double p = 0.0;
  for (std::size_t k = 0; k < s.weights().size(); ++k) p += s.weights()[k] * cols.col(k).squaredNorm();
  return p;
}

std::optional<FockState> conditioned(const FockState& s, const MatrixXcd& cols, double p) {
  if (p <= kZeroProbability) return std::nullopt;
  std::vector<double> w;
  std::vector<Eigen::Index> keep;
  for (std::size_t k = 0; k < s.weights().size(); ++k) {
    const double n2 = cols.col(k).squaredNorm();
    const double wk = s.weights()[k] * n2 / p;
    if (wk > 0.0) {
      w.push_back(wk);
      keep.push_back(static_cast<Eigen::Index>(k));
    }
  }
  double total = 0.0;
  for (double x : w) total += x;
  MatrixXcd c(cols.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    c.col(i) = cols.col(keep[i]).normalized();
    w[i] /= total;
  }
  return FockState::mixture(s.cutoffs(), std::move(w), std::move(c));
}

}  // namespace

LabeledDisplacement step_displacement(const RamseyStep& step) {
  const PhaseVec a = step.alpha_target;
  return LabeledDisplacement::pair(kModeA, std::cos(step.theta_mix) * a, kModeB, std::sin(step.theta_mix) * a);
}

Eigen::Matrix2cd qubit_rotation(double phi) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd r;
  r << cd{s, 0.0}, s * std::polar(1.0, phi), -s * std::polar(1.0, -phi), cd{s, 0.0};
  return r;
}

KrausPair kraus_pair(double phi, PhaseVec alpha, double tau, int N, double omega) {
  if (N < 2) throw std::invalid_argument("kraus_pair: cutoff must be >= 2");
  const MatrixXcd U = std::polar(1.0, phi) * displacement_matrix(alpha, N);
  const MatrixXcd U0 = number_phase(-tau * omega, N);
  const MatrixXcd id = MatrixXcd::Identity(N, N);
  return {0.5 * (id + U) * U0, 0.5 * (id - U) * U0};
}

double completeness_residual(const KrausPair& k) {
  const MatrixXcd sum = k.plus.adjoint() * k.plus + k.minus.adjoint() * k.minus;
  return (sum - MatrixXcd::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
}

std::pair<FockOperator, FockOperator> step_kraus(const RamseyStep& step, const Cutoffs& cutoffs) {
  const FockOperator id = FockOperator::identity(cutoffs);
  const FockOperator u = step_unitary(step, cutoffs);
  return {cd{0.5, 0.0} * (id + u), cd{0.5, 0.0} * (id - u)};
}

FockOperator step_observable(const RamseyStep& step, const Cutoffs& cutoffs) {
  return modular_parts(step_unitary(step, cutoffs)).first;
}

double step_completeness_residual(const RamseyStep& step, const Cutoffs& cutoffs, const MatrixXcd& columns,
                                  Exec exec) {
  const auto [ep, em] = step_kraus(step, cutoffs);
  const MatrixXcd sum = (ep.adjoint() * ep + em.adjoint() * em).apply(columns, exec);
  return (sum - columns).cwiseAbs().maxCoeff();
}

MeasurementOutcome single_measurement(const FockState& state, const RamseyStep& step, Exec exec) {
  const FockOperator u = step_unitary(step, state.cutoffs());
  const MatrixXcd& v = state.components();
  const MatrixXcd uv = u.apply(v, exec);
  const MatrixXcd plus = 0.5 * (v + uv);
  const MatrixXcd minus = 0.5 * (v - uv);

  MeasurementOutcome out;
  out.p_plus = weighted_norm_sq(state, plus);
  out.p_minus = weighted_norm_sq(state, minus);
  out.expectation = out.p_plus - out.p_minus;
  out.direct = state.expectation(step_observable(step, state.cutoffs()), exec).real();
  out.conditioned_plus = conditioned(state, plus, out.p_plus);
  out.conditioned_minus = conditioned(state, minus, out.p_minus);
  return out;
}

NonCommutingSteps::NonCommutingSteps(int first, int second, double phase)
    : std::invalid_argument([&] {
        std::ostringstream os;
        os << "steps " << first << " and " << second << " do not commute: commutation phase " << phase;
        return os.str();
      }()),
      first_(first),
      second_(second),
      phase_(phase) {}

double branch_correlation(const FockState& state, const std::vector<RamseyStep>& steps,
                          std::vector<double>* probabilities, Exec exec) {
  require_steps(steps);
  const std::size_t n = steps.size();
  std::vector<MatrixXcd> branches{state.components()};
  for (std::size_t k = 0; k < n; ++k) {
    const FockOperator u = step_unitary(steps[k], state.cutoffs());
    std::vector<MatrixXcd> next(branches.size() * 2);
    for (std::size_t b = 0; b < branches.size(); ++b) {
      const MatrixXcd uv = u.apply(branches[b], exec);
      next[b] = 0.5 * (branches[b] + uv);
      next[b | (std::size_t{1} << k)] = 0.5 * (branches[b] - uv);
    }
    branches = std::move(next);
  }
  double corr = 0.0;
  if (probabilities) probabilities->assign(branches.size(), 0.0);
  for (std::size_t b = 0; b < branches.size(); ++b) {
    const double p = weighted_norm_sq(state, branches[b]);
    corr += (std::popcount(b) % 2 ? -p : p);
    if (probabilities) (*probabilities)[b] = p;
  }
  return corr;
}

cd trace_correlation(const FockState& state, const std::vector<RamseyStep>& steps, Exec exec) {
  require_steps(steps);
  MatrixXcd v = state.components();
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) v = step_observable(*it, state.cutoffs()).apply(v, exec);
  cd t = 0.0;
  for (std::size_t k = 0; k < state.weights().size(); ++k)
    t += state.weights()[k] * state.components().col(k).dot(v.col(k));
  return t;
}

SequenceResult sequence_correlation(const FockState& state, const std::array<RamseyStep, 3>& steps, Exec exec) {
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double c = reduce_phase(commutation_phase(step_displacement(steps[i]), step_displacement(steps[j])));
      if (std::abs(c) > kTolPhase) throw NonCommutingSteps(i + 1, j + 1, c);
    }
  const std::vector<RamseyStep> seq(steps.begin(), steps.end());
  SequenceResult out;
  std::vector<double> probs;
  out.correlation = branch_correlation(state, seq, &probs, exec);
  std::copy(probs.begin(), probs.end(), out.branch_probabilities.begin());
  const cd t = trace_correlation(state, seq, exec);
  out.trace_value = t.real();
  out.trace_imag = t.imag();
  out.tail_mass = state.tail_mass();
  out.truncation_warning = out.tail_mass > kTailWarning;
  return out;
}

SampledCorrelation sample_correlation(const std::vector<double>& probs, std::int64_t shots, std::uint64_t seed) {
  if (shots < 2) throw std::invalid_argument("sampling needs at least 2 shots");
  if (probs.empty()) throw std::invalid_argument("sampling needs branch probabilities");
  auto rng = stream_rng(seed, 0);
  std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
  std::int64_t sum = 0;
  for (std::int64_t s = 0; s < shots; ++s) sum += std::popcount(dist(rng)) % 2 ? -1 : 1;
  SampledCorrelation out;
  out.shots = shots;
  out.mean = static_cast<double>(sum) / static_cast<double>(shots);
  const double var = (1.0 - out.mean * out.mean) * static_cast<double>(shots) / static_cast<double>(shots - 1);
  out.standard_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(shots));
  return out;
}

std::array<RamseyStep, 3> c3_steps(double alpha_mag, double phi1, double phi2, double phi3) {
  const double a = std::sqrt(2.0) * alpha_mag;
  const double th = pi / 4.0;
  return {RamseyStep{phi1, PhaseVec::polar(a, 0.0), th}, RamseyStep{phi2, PhaseVec::polar(a, 2.0 * pi / 3.0), th},
          RamseyStep{phi3, PhaseVec::polar(a, -2.0 * pi / 3.0), th}};
}

C3Result c3_protocol(double alpha_mag, const FockState& state, Exec exec) {
  if (!std::isfinite(alpha_mag)) throw std::invalid_argument("c3_protocol: non-finite amplitude");
  const double h = pi / 2.0;
  const std::array<std::array<double, 3>, 4> settings{{{0, 0, 0}, {h, h, 0}, {h, 0, h}, {0, h, h}}};
  C3Result out;
  for (int i = 0; i < 4; ++i) {
    const auto s = c3_steps(alpha_mag, settings[i][0], settings[i][1], settings[i][2]);
    out.correlations[i] = branch_correlation(state, {s.begin(), s.end()}, nullptr, exec);
  }
  out.value = out.correlations[0] - out.correlations[1] - out.correlations[2] - out.correlations[3];
  return out;
}

RamseyStep step_from_drive(const DriveProfile& drive, double tau, double t, double phi_pulse, double theta_mix) {
  const ForcedAmplitude f = forced_amplitude(drive, tau);
  const cd a = f.alpha.complex() * std::polar(1.0, drive.omega * t);
  return {phi_pulse + f.phi, PhaseVec::from_complex(a), theta_mix};
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("sequence config: " + what); }

double number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) bad(std::string("\"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

RamseyStep parse_step(const nlohmann::json& j) {
  if (!j.is_object()) bad("each step must be an object");
  const double theta = number(j, "theta_mix", 0.0);
  if (j.contains("drive")) {
    const auto& d = j.at("drive");
    if (!d.is_object()) bad("\"drive\" must be an object");
    const DriveProfile drive = DriveProfile::make(parse_drive_kind(d.value("kind", std::string{})),
                                                  number(d, "lambda0", 0.0), number(d, "omega", 1.0),
                                                  number(d, "delta", 0.0));
    if (!j.contains("tau")) bad("driven step needs \"tau\"");
    return step_from_drive(drive, number(j, "tau", 0.0), number(j, "t", 0.0), number(j, "phi_pulse", 0.0), theta);
  }
  if (!j.contains("alpha")) bad("step needs \"alpha\" or \"drive\"");
  const auto& a = j.at("alpha");
  PhaseVec alpha;
  if (a.is_number()) alpha = PhaseVec::checked(a.get<double>(), 0.0);
  else if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number())
    alpha = PhaseVec::checked(a[0].get<double>(), a[1].get<double>());
  else bad("\"alpha\" must be a number or [re, im]");
  return {number(j, "phi", 0.0), alpha, theta};
}

}  // namespace

SequenceConfig parse_sequence_config(const nlohmann::json& j) {
  if (!j.is_object()) bad("expected an object");
  if (!j.contains("steps") || !j.at("steps").is_array()) bad("\"steps\" array is required");
  SequenceConfig cfg;
  for (const auto& s : j.at("steps")) cfg.steps.push_back(parse_step(s));
  if (cfg.steps.size() != 3) bad("exactly three steps are required");
  if (j.contains("state")) cfg.state = parse_state_spec(j.at("state"), 2);
  if (j.contains("cutoff")) {
    if (!j.at("cutoff").is_number_integer()) bad("\"cutoff\" must be an integer");
    cfg.cutoff = j.at("cutoff").get<int>();
    if (cfg.cutoff < 2) bad("\"cutoff\" must be >= 2");
  }
  return cfg;
}

}  // namespace phasectx
