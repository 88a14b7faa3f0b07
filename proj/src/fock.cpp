#include "phasectx/fock.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace phasectx {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;
using std::numbers::pi;

Index dimension_of(const Cutoffs& cutoffs) {
  Index d = 1;
  for (int n : cutoffs) d *= n;
  return d;
}

namespace {

void require_cutoffs(const Cutoffs& cutoffs) {
  if (cutoffs.empty()) throw std::invalid_argument("at least one mode is required");
  for (int n : cutoffs)
    if (n < 1) throw std::invalid_argument("cutoffs must be >= 1");
}

Index stride_of(const Cutoffs& cutoffs, int mode) {
  Index s = 1;
  for (int j = 0; j < mode; ++j) s *= cutoffs[j];
  return s;
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

// ------------------------------------------------------------ FockOperator

FockOperator::FockOperator(Cutoffs cutoffs) : cutoffs_(std::move(cutoffs)) { require_cutoffs(cutoffs_); }

FockOperator FockOperator::identity(Cutoffs cutoffs) {
  const auto modes = cutoffs.size();
  return product(std::move(cutoffs), 1.0, std::vector<Factor>(modes));
}

FockOperator FockOperator::on_mode(Cutoffs cutoffs, int mode, MatrixXcd factor) {
  std::vector<Factor> f(cutoffs.size());
  if (mode < 0 || mode >= static_cast<int>(cutoffs.size())) throw std::invalid_argument("on_mode: mode out of range");
  f[mode] = std::make_shared<const MatrixXcd>(std::move(factor));
  return product(std::move(cutoffs), 1.0, std::move(f));
}

FockOperator FockOperator::product(Cutoffs cutoffs, cd coeff, std::vector<Factor> factors) {
  FockOperator op(std::move(cutoffs));
  if (factors.size() != op.cutoffs_.size()) throw std::invalid_argument("FockOperator: one factor per mode");
  for (std::size_t m = 0; m < factors.size(); ++m) {
    const auto& f = factors[m];
    if (f && (f->rows() != op.cutoffs_[m] || f->cols() != op.cutoffs_[m]))
      throw std::invalid_argument("FockOperator: factor size does not match the cutoff");
  }
  op.terms_.push_back({coeff, std::move(factors)});
  return op;
}

FockOperator FockOperator::adjoint() const {
  FockOperator out(cutoffs_);
  for (const auto& t : terms_) {
    Term a{std::conj(t.coeff), {}};
    for (const auto& f : t.factors) a.factors.push_back(f ? std::make_shared<const MatrixXcd>(f->adjoint()) : nullptr);
    out.terms_.push_back(std::move(a));
  }
  return out;
}

MatrixXcd FockOperator::dense() const {
  MatrixXcd out = MatrixXcd::Zero(dimension(), dimension());
  for (const auto& t : terms_) {
    MatrixXcd full = MatrixXcd::Identity(1, 1);
    for (std::size_t m = 0; m < cutoffs_.size(); ++m) {
      const MatrixXcd f = t.factors[m] ? *t.factors[m] : MatrixXcd::Identity(cutoffs_[m], cutoffs_[m]);
      full = kron(f, full);
    }
    out += t.coeff * full;
  }
  return out;
}

void apply_mode_factor(const MatrixXcd& factor, int mode, const Cutoffs& cutoffs, MatrixXcd& columns, Exec exec) {
  if (mode < 0 || mode >= static_cast<int>(cutoffs.size())) throw std::invalid_argument("apply: mode out of range");
  const Index n = cutoffs[mode];
  if (factor.rows() != n || factor.cols() != n) throw std::invalid_argument("apply: factor size mismatch");
  if (columns.rows() != dimension_of(cutoffs)) throw std::invalid_argument("apply: column length mismatch");
  const Index s = stride_of(cutoffs, mode);
  const Index blocks = columns.size() / (s * n);
  cd* data = columns.data();

  if (s == 1) {
    // the buffer is an n x blocks matrix; fixed-width column panels keep the
    // floating-point result independent of the thread count
    constexpr Index kPanel = 64;
    const Index panels = (blocks + kPanel - 1) / kPanel;
    auto panel = [&](Index c) {
      const Index begin = c * kPanel;
      const Index end = std::min(blocks, begin + kPanel);
      Eigen::Map<MatrixXcd> view(data + begin * n, n, end - begin);
      view = factor * view;
    };
    if (exec == Exec::Serial) {
      for (Index c = 0; c < panels; ++c) panel(c);
      return;
    }
#pragma omp parallel for schedule(static)
    for (Index c = 0; c < panels; ++c) panel(c);
    return;
  }
  // each block is s x n with the mode index along columns
  const MatrixXcd ft = factor.transpose();
  if (exec == Exec::Serial) {
    for (Index r = 0; r < blocks; ++r) {
      Eigen::Map<MatrixXcd> blk(data + r * s * n, s, n);
      blk = blk * ft;
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < blocks; ++r) {
    Eigen::Map<MatrixXcd> blk(data + r * s * n, s, n);
    blk = blk * ft;
  }
}

MatrixXcd FockOperator::apply(const MatrixXcd& columns, Exec exec) const {
  if (columns.rows() != dimension()) throw std::invalid_argument("apply: column length mismatch");
  MatrixXcd out = MatrixXcd::Zero(columns.rows(), columns.cols());
  for (const auto& t : terms_) {
    MatrixXcd tmp = columns;
    for (std::size_t m = 0; m < t.factors.size(); ++m)
      if (t.factors[m]) apply_mode_factor(*t.factors[m], static_cast<int>(m), cutoffs_, tmp, exec);
    out += t.coeff * tmp;
  }
  return out;
}

namespace {

void require_same_space(const FockOperator& a, const FockOperator& b) {
  if (a.cutoffs() != b.cutoffs()) throw std::invalid_argument("FockOperator: cutoff mismatch");
}

}  // namespace

FockOperator operator+(const FockOperator& a, const FockOperator& b) {
  require_same_space(a, b);
  FockOperator out = a;
  out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
  return out;
}

FockOperator operator-(const FockOperator& a, const FockOperator& b) { return a + cd{-1.0, 0.0} * b; }

FockOperator operator*(cd s, const FockOperator& a) {
  FockOperator out = a;
  for (auto& t : out.terms_) t.coeff *= s;
  return out;
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  require_same_space(a, b);
  FockOperator out(a.cutoffs_);
  for (const auto& ta : a.terms_)
    for (const auto& tb : b.terms_) {
      FockOperator::Term t{ta.coeff * tb.coeff, {}};
      for (std::size_t m = 0; m < ta.factors.size(); ++m) {
        const auto& fa = ta.factors[m];
        const auto& fb = tb.factors[m];
        if (!fa) t.factors.push_back(fb);
        else if (!fb) t.factors.push_back(fa);
        else t.factors.push_back(std::make_shared<const MatrixXcd>((*fa) * (*fb)));
      }
      out.terms_.push_back(std::move(t));
    }
  return out;
}

// --------------------------------------------------------------- FockState

FockState::FockState(Cutoffs cutoffs, std::vector<double> weights, MatrixXcd components)
    : cutoffs_(std::move(cutoffs)), weights_(std::move(weights)), components_(std::move(components)) {}

FockState FockState::pure(Cutoffs cutoffs, VectorXcd amplitudes) {
  require_cutoffs(cutoffs);
  if (amplitudes.size() != dimension_of(cutoffs)) throw std::invalid_argument("state length does not match cutoffs");
  if (std::abs(amplitudes.norm() - 1.0) > 1e-10) throw std::invalid_argument("pure state is not normalised");
  MatrixXcd c = amplitudes;
  return FockState(std::move(cutoffs), {1.0}, std::move(c));
}

FockState FockState::normalized(Cutoffs cutoffs, VectorXcd amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalise a zero or non-finite vector");
  amplitudes /= n;
  return pure(std::move(cutoffs), std::move(amplitudes));
}

FockState FockState::mixture(Cutoffs cutoffs, std::vector<double> weights, MatrixXcd components) {
  require_cutoffs(cutoffs);
  if (components.rows() != dimension_of(cutoffs)) throw std::invalid_argument("state length does not match cutoffs");
  if (static_cast<Index>(weights.size()) != components.cols() || weights.empty())
    throw std::invalid_argument("one weight per component is required");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0)) throw std::invalid_argument("mixture weights must be non-negative");
    if (std::abs(components.col(k).norm() - 1.0) > 1e-10)
      throw std::invalid_argument("mixture components must be normalised");
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument("mixture weights must sum to 1");
  return FockState(std::move(cutoffs), std::move(weights), std::move(components));
}

FockState FockState::from_density(Cutoffs cutoffs, const MatrixXcd& rho) {
  require_cutoffs(cutoffs);
  const Index d = dimension_of(cutoffs);
  if (rho.rows() != d || rho.cols() != d) throw std::invalid_argument("density size does not match cutoffs");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("density is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw std::invalid_argument("density trace is not 1");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10) throw std::invalid_argument("density is not positive semidefinite");
  std::vector<double> w;
  std::vector<Index> keep;
  for (Index i = 0; i < d; ++i)
    if (ev(i) > 1e-14) {
      w.push_back(ev(i));
      keep.push_back(i);
    }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  MatrixXcd comps(d, static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    comps.col(k) = es.eigenvectors().col(keep[k]);
    w[k] /= total;
  }
  return FockState(std::move(cutoffs), std::move(w), std::move(comps));
}

MatrixXcd FockState::density() const {
  MatrixXcd rho = MatrixXcd::Zero(dimension(), dimension());
  for (std::size_t k = 0; k < weights_.size(); ++k) rho += weights_[k] * components_.col(k) * components_.col(k).adjoint();
  return rho;
}

std::vector<double> FockState::populations(int mode) const {
  if (mode < 0 || mode >= mode_count()) throw std::invalid_argument("populations: mode out of range");
  const Index s = stride_of(cutoffs_, mode);
  const int n = cutoffs_[mode];
  std::vector<double> p(n, 0.0);
  for (std::size_t k = 0; k < weights_.size(); ++k)
    for (Index i = 0; i < dimension(); ++i) p[(i / s) % n] += weights_[k] * std::norm(components_(i, k));
  return p;
}

int FockState::support(int mode) const {
  const auto p = populations(mode);
  for (int n = static_cast<int>(p.size()) - 1; n >= 0; --n)
    if (p[n] > 1e-16) return n + 1;
  return 0;
}

double FockState::mass_at_or_above(int mode, int level) const {
  const auto p = populations(mode);
  double m = 0.0;
  for (int n = std::max(level, 0); n < static_cast<int>(p.size()); ++n) m += p[n];
  return m;
}

double FockState::tail_mass() const {
  double t = 0.0;
  for (int m = 0; m < mode_count(); ++m) t = std::max(t, mass_at_or_above(m, cutoffs_[m] / 2));
  return t;
}

FockState FockState::embedded(const Cutoffs& larger) const {
  if (larger.size() != cutoffs_.size()) throw std::invalid_argument("embedded: mode count mismatch");
  for (int m = 0; m < mode_count(); ++m)
    if (larger[m] < support(m)) throw std::invalid_argument("embedded: support does not fit the new cutoff");
  MatrixXcd out = MatrixXcd::Zero(dimension_of(larger), components_.cols());
  for (Index i = 0; i < dimension(); ++i) {
    Index rest = i;
    Index j = 0;
    Index stride = 1;
    bool fits = true;
    for (int m = 0; m < mode_count(); ++m) {
      const Index level = rest % cutoffs_[m];
      rest /= cutoffs_[m];
      if (level >= larger[m]) fits = false;
      j += level * stride;
      stride *= larger[m];
    }
    if (fits) out.row(j) = components_.row(i);
  }
  // renormalise away the sub-1e-16 populations dropped when shrinking
  for (Index k = 0; k < out.cols(); ++k) out.col(k).normalize();
  return FockState(larger, weights_, std::move(out));
}

cd FockState::expectation(const FockOperator& op, Exec exec) const {
  if (op.cutoffs() != cutoffs_) throw std::invalid_argument("expectation: cutoff mismatch");
  const MatrixXcd applied = op.apply(components_, exec);
  cd v = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) v += weights_[k] * components_.col(k).dot(applied.col(k));
  return v;
}

// --------------------------------------------------------- single-mode maps

MatrixXcd annihilation_matrix(int N) {
  if (N < 1) throw std::invalid_argument("cutoff must be >= 1");
  MatrixXcd a = MatrixXcd::Zero(N, N);
  for (int n = 1; n < N; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

MatrixXcd number_phase(double phi, int N) {
  MatrixXcd r = MatrixXcd::Zero(N, N);
  for (int n = 0; n < N; ++n) r(n, n) = std::polar(1.0, phi * n);
  return r;
}

MatrixXcd displacement_matrix(PhaseVec alpha, int N) {
  if (N < 2) throw std::invalid_argument("displacement_matrix: cutoff must be >= 2");
  if (!alpha.is_finite()) throw std::invalid_argument("displacement_matrix: non-finite amplitude");
  if (alpha.is_zero()) return MatrixXcd::Identity(N, N);

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd sub(N - 1);
  for (int n = 0; n + 1 < N; ++n) sub(n) = std::sqrt(static_cast<double>(n + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub);
  const Eigen::MatrixXd& V = es.eigenvectors();

  const double r = alpha.norm();
  const double theta = std::atan2(alpha.im, alpha.re);
  Eigen::VectorXcd phases(N);
  for (int i = 0; i < N; ++i) phases(i) = std::polar(1.0, r * es.eigenvalues()(i));
  const MatrixXcd Vc = V.cast<cd>();
  MatrixXcd M = Vc * phases.asDiagonal() * Vc.transpose();
  const double rot = theta - pi / 2.0;
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) M(j, k) *= std::polar(1.0, rot * (j - k));
  return M;
}

MatrixXcd displacement_matrix_analytic(PhaseVec alpha, int N) {
  if (N < 2) throw std::invalid_argument("displacement_matrix_analytic: cutoff must be >= 2");
  if (alpha.is_zero()) return MatrixXcd::Identity(N, N);
  const double r = alpha.norm();
  const double x = r * r;
  const double theta = std::atan2(alpha.im, alpha.re);
  MatrixXcd D(N, N);
  for (int m = 0; m < N; ++m)
    for (int n = 0; n < N; ++n) {
      const int lo = std::min(m, n);
      const int k = std::abs(m - n);
      // sqrt(lo!/hi!) r^k e^{-x/2}
      const double mag =
          std::exp(0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + k + 1.0)) + k * std::log(r) - 0.5 * x);
      const double lag = std::assoc_laguerre(static_cast<unsigned>(lo), static_cast<unsigned>(k), x);
      // m >= n: alpha^k ; m < n: (-alpha^*)^k
      const double angle = m >= n ? k * theta : k * (pi - theta);
      D(m, n) = mag * lag * std::polar(1.0, angle);
    }
  return D;
}

FockOperator displacement_operator(const LabeledDisplacement& word, const Cutoffs& cutoffs) {
  std::vector<FockOperator::Factor> factors(cutoffs.size());
  for (const auto& [mode, a] : word.amplitudes()) {
    if (mode < 0 || mode >= static_cast<int>(cutoffs.size())) {
      std::ostringstream os;
      os << "displacement word acts on mode " << mode << " but only " << cutoffs.size() << " modes are present";
      throw std::invalid_argument(os.str());
    }
    factors[mode] = std::make_shared<const MatrixXcd>(displacement_matrix(a, cutoffs[mode]));
  }
  return FockOperator::product(cutoffs, std::polar(1.0, word.phase()), std::move(factors));
}

std::pair<FockOperator, FockOperator> modular_parts(const FockOperator& op) {
  const FockOperator adj = op.adjoint();
  return {cd{0.5, 0.0} * (op + adj), cd{0.0, -0.5} * (op - adj)};
}

// ----------------------------------------------------------- PM expression

namespace {

struct WordPair {
  FockOperator d;
  FockOperator dag;
};

// (A_R v, A_I v) from D v and D^dagger v.
std::pair<MatrixXcd, MatrixXcd> parts_apply(const WordPair& w, const MatrixXcd& v, Exec exec) {
  const MatrixXcd dv = w.d.apply(v, exec);
  const MatrixXcd dd = w.dag.apply(v, exec);
  return {0.5 * (dv + dd), cd{0.0, -0.5} * (dv - dd)};
}

}  // namespace

MatrixXcd line_apply(const std::array<LabeledDisplacement, 3>& line, const Cutoffs& cutoffs, const MatrixXcd& columns,
                     Exec exec) {
  std::array<WordPair, 3> w{
      WordPair{displacement_operator(line[0], cutoffs), displacement_operator(inverse(line[0]), cutoffs)},
      WordPair{displacement_operator(line[1], cutoffs), displacement_operator(inverse(line[1]), cutoffs)},
      WordPair{displacement_operator(line[2], cutoffs), displacement_operator(inverse(line[2]), cutoffs)}};
  const auto [v3r, v3i] = parts_apply(w[2], columns, exec);
  const auto [rr, ir] = parts_apply(w[1], v3r, exec);  // A2R A3R, A2I A3R
  const auto [ri, ii] = parts_apply(w[1], v3i, exec);  // A2R A3I, A2I A3I
  const MatrixXcd t1 = rr - ii;
  const MatrixXcd t2 = ir + ri;
  const MatrixXcd p = parts_apply(w[0], t1, exec).first;
  const MatrixXcd q = parts_apply(w[0], t2, exec).second;
  return p - q;
}

MatrixXcd chi_apply(const PMSquareSpec& square, const Cutoffs& cutoffs, const MatrixXcd& columns, Exec exec) {
  MatrixXcd out = MatrixXcd::Zero(columns.rows(), columns.cols());
  for (int l = 0; l < kLineCount; ++l)
    out += static_cast<double>(square.target_signs[l]) * line_apply(square.line(l), cutoffs, columns, exec);
  return out;
}

double line_expectation(const std::array<LabeledDisplacement, 3>& line, const FockState& state, Exec exec) {
  const MatrixXcd applied = line_apply(line, state.cutoffs(), state.components(), exec);
  double v = 0.0;
  for (std::size_t k = 0; k < state.weights().size(); ++k)
    v += state.weights()[k] * state.components().col(k).dot(applied.col(k)).real();
  return v;
}

ChiEvaluation chi_pm_expectation(const PMSquareSpec& square, const FockState& state, Exec exec) {
  if (!validate_square(square).pass) throw std::invalid_argument("chi_pm_expectation: square fails validation");
  ChiEvaluation out;
  for (int l = 0; l < kLineCount; ++l) {
    out.line_values[l] = line_expectation(square.line(l), state, exec);
    out.value += square.target_signs[l] * out.line_values[l];
  }
  out.tail_mass = state.tail_mass();
  out.truncation_warning = out.tail_mass > kTailWarning;
  return out;
}

std::vector<ConvergenceRow> convergence_scan(const PMSquareSpec& square, const StateSpec& state,
                                             const std::vector<int>& cutoffs, Exec exec) {
  if (cutoffs.empty()) throw std::invalid_argument("convergence_scan: no cutoffs given");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] < 2) throw std::invalid_argument("convergence_scan: cutoffs must be >= 2");
    if (i > 0 && cutoffs[i] <= cutoffs[i - 1]) throw std::invalid_argument("convergence_scan: cutoffs must increase");
  }
  std::vector<ConvergenceRow> rows;
  for (int N : cutoffs) {
    const FockState s = materialize(state, Cutoffs(static_cast<std::size_t>(mode_count(state)), N));
    const ChiEvaluation e = chi_pm_expectation(square, s, exec);
    rows.push_back({N, e.value, std::abs(e.value - 6.0), e.tail_mass, e.truncation_warning});
  }
  return rows;
}

}  // namespace phasectx
