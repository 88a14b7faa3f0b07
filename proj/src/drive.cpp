#include "phasectx/drive.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "phasectx/fock.hpp"

namespace phasectx {

using cd = std::complex<double>;

std::string to_string(DriveKind kind) {
  return kind == DriveKind::ComplexExponential ? "complex-exponential" : "real-cosine";
}

DriveKind parse_drive_kind(const std::string& name) {
  if (name == "complex-exponential") return DriveKind::ComplexExponential;
  if (name == "real-cosine") return DriveKind::RealCosine;
  throw std::invalid_argument("unknown drive kind \"" + name + "\" (complex-exponential | real-cosine)");
}

DriveProfile DriveProfile::make(DriveKind kind, double lambda0, double omega, double delta) {
  if (!std::isfinite(lambda0) || !std::isfinite(omega) || !std::isfinite(delta))
    throw std::invalid_argument("drive parameters must be finite");
  if (!(omega > 0.0)) throw std::invalid_argument("drive omega must be > 0");
  return {kind, lambda0, omega, delta};
}

cd DriveProfile::coupling(double t) const {
  if (kind == DriveKind::ComplexExponential) return lambda0 * std::polar(1.0, -(omega - delta) * t);
  return lambda0 * std::cos((omega + delta) * t);
}

cd DriveProfile::force(double t) const { return coupling(t) * std::polar(1.0, omega * t); }

namespace {

struct Tone {
  cd c;
  double nu;
};

std::vector<Tone> tones(const DriveProfile& d) {
  if (d.kind == DriveKind::ComplexExponential) return {{d.lambda0, d.delta}};
  return {{0.5 * d.lambda0, 2.0 * d.omega + d.delta}, {0.5 * d.lambda0, -d.delta}};
}

// e^{ix} - 1 without cancellation
cd expm1i(double x) {
  const double s = std::sin(0.5 * x);
  return {-2.0 * s * s, std::sin(x)};
}

// int_0^tau e^{i a t} dt
cd E(double a, double tau) {
  if (a == 0.0) return tau;
  return expm1i(a * tau) / cd{0.0, a};
}

// int_0^tau dt1 e^{i a t1} int_0^t1 dt2 e^{-i b t2}
cd J(double a, double b, double tau) {
  if (b != 0.0) return (E(a, tau) - E(a - b, tau)) / cd{0.0, b};
  if (a == 0.0) return 0.5 * tau * tau;
  // int_0^tau t e^{i a t} dt
  return (tau * std::polar(1.0, a * tau) - E(a, tau)) / cd{0.0, a};
}

ForcedAmplitude finish(const DriveProfile& d, double tau, cd alpha_tilde, double phi, bool limit) {
  ForcedAmplitude out;
  out.alpha_tilde = PhaseVec::from_complex(alpha_tilde);
  out.alpha = PhaseVec::from_complex(std::polar(1.0, -d.omega * tau) * alpha_tilde);
  out.phi = phi;
  out.limit = limit;
  return out;
}

void require_tau(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be finite and >= 0");
}

}  // namespace

ForcedAmplitude tone_amplitude(const DriveProfile& d, double tau) {
  require_tau(tau);
  if (tau == 0.0) return finish(d, 0.0, 0.0, 0.0, d.delta == 0.0);
  const auto ts = tones(d);
  cd F = 0.0;
  for (const auto& t : ts) F += t.c * E(t.nu, tau);
  double phi = 0.0;
  for (const auto& a : ts)
    for (const auto& b : ts) phi += (a.c * std::conj(b.c) * J(a.nu, b.nu, tau)).imag();
  return finish(d, tau, cd{0.0, -1.0} * F, phi, d.delta == 0.0);
}

ForcedAmplitude forced_amplitude(const DriveProfile& d, double tau) {
  require_tau(tau);
  if (tau == 0.0) return finish(d, 0.0, 0.0, 0.0, d.delta == 0.0);
  const double l = d.lambda0;
  const double w = d.omega;
  const double dl = d.delta;
  if (dl == 0.0) {
    if (d.kind == DriveKind::ComplexExponential) return finish(d, tau, cd{0.0, -l * tau}, 0.0, true);
    return tone_amplitude(d, tau);
  }
  if (d.kind == DriveKind::ComplexExponential) {
    const cd at = (l / dl) * -expm1i(dl * tau);
    const double phi = (l * l) / (dl * dl) * (dl * tau - std::sin(dl * tau));
    return finish(d, tau, at, phi, false);
  }
  const double aR = -l * w / (dl * (0.5 * dl + w)) * std::sin(0.5 * dl * tau) * std::sin((0.5 * dl + w) * tau);
  const double aI = -l / (dl * (dl + 2.0 * w)) * ((dl + w) * std::sin((dl + w) * tau) - w * std::sin(w * tau));
  const cd alpha{aR, aI};
  ForcedAmplitude out = finish(d, tau, std::polar(1.0, w * tau) * alpha, tone_amplitude(d, tau).phi, false);
  out.alpha = {aR, aI};
  return out;
}

ForcedAmplitude integrate_drive(const DriveProfile& d, double tau, int steps) {
  require_tau(tau);
  if (steps < 100) throw std::invalid_argument("integrate_drive needs steps >= 100");
  const double h = tau / steps;
  cd F = 0.0;
  double phi = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const cd f0 = d.force(t);
    const cd fm = d.force(t + 0.5 * h);
    const cd f1 = d.force(t + h);
    // (F, phi)' = (f, Im(f conj F)); F' does not depend on the state
    const cd F1 = F;
    const cd F2 = F + 0.5 * h * f0;
    const cd F3 = F + 0.5 * h * fm;
    const cd F4 = F + h * fm;
    const double p1 = (f0 * std::conj(F1)).imag();
    const double p2 = (fm * std::conj(F2)).imag();
    const double p3 = (fm * std::conj(F3)).imag();
    const double p4 = (f1 * std::conj(F4)).imag();
    F += h / 6.0 * (f0 + 4.0 * fm + f1);
    phi += h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
  }
  return finish(d, tau, cd{0.0, -1.0} * F, phi, false);
}

ForcedAmplitude fock_drive_evolution(const DriveProfile& d, double tau, int steps, int cutoff) {
  require_tau(tau);
  if (steps < 100) throw std::invalid_argument("fock_drive_evolution needs steps >= 100");
  if (cutoff < 2) throw std::invalid_argument("fock_drive_evolution needs cutoff >= 2");
  const Eigen::MatrixXcd b = annihilation_matrix(cutoff);
  const Eigen::MatrixXcd bd = b.adjoint();
  auto rhs = [&](double t, const Eigen::VectorXcd& psi) -> Eigen::VectorXcd {
    const cd f = d.force(t);
    return cd{0.0, -1.0} * (f * (bd * psi) + std::conj(f) * (b * psi));
  };
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(cutoff);
  psi(0) = 1.0;
  const double h = tau / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const Eigen::VectorXcd k1 = rhs(t, psi);
    const Eigen::VectorXcd k2 = rhs(t + 0.5 * h, psi + 0.5 * h * k1);
    const Eigen::VectorXcd k3 = rhs(t + 0.5 * h, psi + 0.5 * h * k2);
    const Eigen::VectorXcd k4 = rhs(t + h, psi + h * k3);
    psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const cd at = psi.dot(b * psi);
  return finish(d, tau, at, std::arg(psi(0)), false);
}

double relative_error(const ForcedAmplitude& v, const ForcedAmplitude& ref) {
  const double da = std::abs(v.alpha_tilde.complex() - ref.alpha_tilde.complex());
  const double na = ref.alpha_tilde.norm();
  const double dp = std::abs(v.phi - ref.phi);
  const double np = std::abs(ref.phi);
  return std::max(na > 0.0 ? da / na : da, np > 0.0 ? dp / np : dp);
}

std::vector<TraceRow> drive_trace(const DriveProfile& d, double tau_max, int points) {
  require_tau(tau_max);
  if (points < 2) throw std::invalid_argument("drive_trace needs at least 2 points");
  std::vector<TraceRow> rows;
  for (int i = 0; i < points; ++i) {
    const double tau = tau_max * i / (points - 1);
    rows.push_back({tau, forced_amplitude(d, tau)});
  }
  return rows;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream os;
  os << "tau,alpha_re,alpha_im,alpha_tilde_re,alpha_tilde_im,phi\n";
  char buf[256];
  for (const auto& r : rows) {
    const auto& a = r.amplitude;
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.tau, a.alpha.re, a.alpha.im,
                  a.alpha_tilde.re, a.alpha_tilde.im, a.phi);
    os << buf;
  }
  return os.str();
}

}  // namespace phasectx
