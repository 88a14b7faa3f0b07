#include "phasectx/discrete_weyl.hpp"

#include <omp.h>

#include <sstream>
#include <stdexcept>

namespace phasectx {

using std::numbers::pi;
using Eigen::MatrixXcd;

namespace {

long long mod(long long x, long long n) {
  const long long r = x % n;
  return r < 0 ? r + n : r;
}

void require_dim(int d) {
  if (d < 2) throw std::invalid_argument("HW dimension must be >= 2");
}

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool congruent_half(long long x, int d) { return mod(x, d) == d / 2; }

}  // namespace

HWLabel HWLabel::make(long long l, long long m, int d) {
  require_dim(d);
  return {static_cast<int>(mod(l, d)), static_cast<int>(mod(m, d)), d};
}

ExactPhase ExactPhase::make(long long q, int d) {
  require_dim(d);
  return {static_cast<int>(mod(q, 2LL * d)), d};
}

std::complex<double> ExactPhase::value() const {
  // exact for the quarter turns, which is what the d=2 Pauli checks rely on
  const int n = 2 * d;
  if ((4 * q) % n == 0) {
    switch ((4 * q) / n) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      case 3: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, pi * q / d);
}

ExactPhase operator*(ExactPhase a, ExactPhase b) {
  if (a.d != b.d) throw std::invalid_argument("ExactPhase dimension mismatch");
  return ExactPhase::make(static_cast<long long>(a.q) + b.q, a.d);
}

MatrixXcd clock_matrix(int d) {
  require_dim(d);
  MatrixXcd z = MatrixXcd::Zero(d, d);
  for (int n = 0; n < d; ++n) z(n, n) = ExactPhase::make(2LL * n, d).value();
  return z;
}

MatrixXcd shift_matrix(int d) {
  require_dim(d);
  MatrixXcd x = MatrixXcd::Zero(d, d);
  for (int n = 0; n < d; ++n) x((n + 1) % d, n) = 1.0;
  return x;
}

MatrixXcd hw_matrix(const HWLabel& label) {
  const int d = label.d;
  // Z^l X^m |n> = e^{i 2 pi l (n+m)/d} |n+m>
  MatrixXcd out = MatrixXcd::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    const int target = (n + label.m) % d;
    const long long q = 2LL * label.l * target - static_cast<long long>(label.l) * label.m;
    out(target, n) = ExactPhase::make(q, d).value();
  }
  return out;
}

MatrixXcd word_matrix(const HWWord& word) { return word.phase.value() * hw_matrix(word.label); }

HWWord hw_word(long long l, long long m, int d) {
  const HWLabel label = HWLabel::make(l, m, d);
  const long long q = static_cast<long long>(label.l) * label.m - l * m;
  return {label, ExactPhase::make(q, d)};
}

HWWord identity_word(int d) { return {HWLabel::make(0, 0, d), ExactPhase::make(0, d)}; }

long long symplectic(const HWLabel& a, const HWLabel& b) {
  return static_cast<long long>(a.l) * b.m - static_cast<long long>(a.m) * b.l;
}

HWWord compose_exact(const HWWord& a, const HWWord& b) {
  const int d = a.label.d;
  if (b.label.d != d || a.phase.d != d || b.phase.d != d)
    throw std::invalid_argument("compose_exact: dimension mismatch");
  const HWWord sum = hw_word(static_cast<long long>(a.label.l) + b.label.l,
                             static_cast<long long>(a.label.m) + b.label.m, d);
  const long long q = static_cast<long long>(a.phase.q) + b.phase.q + symplectic(a.label, b.label) + sum.phase.q;
  return {sum.label, ExactPhase::make(q, d)};
}

PhaseVec induced_amplitude(long long l, long long m, int d) {
  const double s = std::sqrt(pi / d);
  return {s * static_cast<double>(l), -s * static_cast<double>(m)};
}

bool is_congruent_triple(const HWTriple& t, int d) {
  for (const auto& a : t)
    if (a.d != d) return false;
  if (mod(static_cast<long long>(t[0].l) + t[1].l + t[2].l, d) != 0) return false;
  if (mod(static_cast<long long>(t[0].m) + t[1].m + t[2].m, d) != 0) return false;
  return congruent_half(symplectic(t[0], t[1]), d) && congruent_half(symplectic(t[1], t[2]), d) &&
         congruent_half(symplectic(t[2], t[0]), d);
}

namespace {

void require_even(int d) {
  if (d < 2 || d % 2 != 0) {
    std::ostringstream os;
    os << "dimension must be even: the symplectic products are integers, so they can equal d/2 = "
       << d << "/2 only for even d";
    throw std::domain_error(os.str());
  }
}

bool exact_triple(const HWTriple& t, int d) {
  const long long h = d / 2;
  return symplectic(t[0], t[1]) == h && symplectic(t[1], t[2]) == h && symplectic(t[2], t[0]) == h;
}

// Candidates for fixed (l1, m1): loop over a2, a3 determined by the zero-sum constraint.
void scan_first(int d, int l1, int m1, TripleSearch& out) {
  const HWLabel a1{l1, m1, d};
  for (int l2 = 0; l2 < d; ++l2)
    for (int m2 = 0; m2 < d; ++m2) {
      const HWLabel a2{l2, m2, d};
      const HWLabel a3 = HWLabel::make(-l1 - l2, -m1 - m2, d);
      const HWTriple t{a1, a2, a3};
      if (!is_congruent_triple(t, d)) continue;
      out.congruent.push_back(t);
      if (exact_triple(t, d)) out.exact.push_back(t);
    }
}

}  // namespace

TripleSearch find_triples(int d, Exec exec) {
  require_even(d);
  TripleSearch out;
  out.d = d;
  const int firsts = d * d;
  if (exec == Exec::Serial) {
    for (int i = 0; i < firsts; ++i) scan_first(d, i / d, i % d, out);
    return out;
  }
  std::vector<TripleSearch> parts(firsts);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < firsts; ++i) scan_first(d, i / d, i % d, parts[i]);
  for (auto& p : parts) {
    out.congruent.insert(out.congruent.end(), p.congruent.begin(), p.congruent.end());
    out.exact.insert(out.exact.end(), p.exact.begin(), p.exact.end());
  }
  return out;
}

TripleSearch find_triples_bruteforce(int d) {
  require_even(d);
  TripleSearch out;
  out.d = d;
  for (int l1 = 0; l1 < d; ++l1)
    for (int m1 = 0; m1 < d; ++m1)
      for (int l2 = 0; l2 < d; ++l2)
        for (int m2 = 0; m2 < d; ++m2)
          for (int l3 = 0; l3 < d; ++l3)
            for (int m3 = 0; m3 < d; ++m3) {
              const HWTriple t{HWLabel{l1, m1, d}, HWLabel{l2, m2, d}, HWLabel{l3, m3, d}};
              if (!is_congruent_triple(t, d)) continue;
              out.congruent.push_back(t);
              if (exact_triple(t, d)) out.exact.push_back(t);
            }
  return out;
}

std::optional<std::array<std::array<long long, 2>, 3>> lift_triple(const HWTriple& t) {
  const int d = t[0].d;
  const long long h = d / 2;
  for (int i1 = -1; i1 <= 1; ++i1)
    for (int j1 = -1; j1 <= 1; ++j1)
      for (int i2 = -1; i2 <= 1; ++i2)
        for (int j2 = -1; j2 <= 1; ++j2) {
          const long long l1 = t[0].l + static_cast<long long>(i1) * d;
          const long long m1 = t[0].m + static_cast<long long>(j1) * d;
          const long long l2 = t[1].l + static_cast<long long>(i2) * d;
          const long long m2 = t[1].m + static_cast<long long>(j2) * d;
          const long long w = l1 * m2 - m1 * l2;
          if (w != h && w != -h) continue;
          const long long l3 = -l1 - l2;
          const long long m3 = -m1 - m2;
          const auto a1 = induced_amplitude(l1, m1, d);
          const auto a2 = induced_amplitude(l2, m2, d);
          const auto a3 = induced_amplitude(l3, m3, d);
          if (satisfied(check_triple(a1, a2, a3)))
            return std::array<std::array<long long, 2>, 3>{{{l1, m1}, {l2, m2}, {l3, m3}}};
        }
  return std::nullopt;
}

std::array<MatrixXcd, 3> DiscreteSquare::line(int line) const {
  if (line < 3) return ops[line];
  const int k = line - 3;
  return {ops[0][k], ops[1][k], ops[2][k]};
}

DiscreteSquare build_discrete_square(const HWTriple& t, int d) {
  if (!is_congruent_triple(t, d)) throw std::invalid_argument("build_discrete_square: invalid triple");
  auto pos = [&](int i) { return word_matrix(hw_word(t[i].l, t[i].m, d)); };
  auto neg = [&](int i) { return word_matrix(hw_word(-t[i].l, -t[i].m, d)); };
  const MatrixXcd id = MatrixXcd::Identity(d, d);

  DiscreteSquare sq;
  sq.d = d;
  sq.ops = {{
      {kron(neg(0), id), kron(id, neg(0)), kron(pos(0), pos(0))},
      {kron(id, neg(1)), kron(neg(1), id), kron(pos(1), pos(1))},
      {kron(pos(0), pos(1)), kron(pos(1), pos(0)), kron(pos(2), pos(2))},
  }};
  return sq;
}

std::pair<MatrixXcd, MatrixXcd> hermitian_parts(const MatrixXcd& a) {
  const MatrixXcd adj = a.adjoint();
  const std::complex<double> two_i{0.0, 2.0};
  return {(a + adj) / 2.0, (a - adj) / two_i};
}

MatrixXcd line_product_real(const std::array<MatrixXcd, 3>& ops) {
  const auto [r1, i1] = hermitian_parts(ops[0]);
  const auto [r2, i2] = hermitian_parts(ops[1]);
  const auto [r3, i3] = hermitian_parts(ops[2]);
  return (r1 * r2 - i1 * i2) * r3 - (i1 * r2 + r1 * i2) * i3;
}

DiscreteSquareCheck check_discrete_square(const DiscreteSquare& sq, double tol) {
  DiscreteSquareCheck c;
  const Eigen::Index n = sq.ops[0][0].rows();
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  MatrixXcd chi = MatrixXcd::Zero(n, n);
  for (int l = 0; l < 6; ++l) {
    const auto ops = sq.line(l);
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        c.max_commutator =
            std::max(c.max_commutator, (ops[a] * ops[b] - ops[b] * ops[a]).cwiseAbs().maxCoeff());
    const MatrixXcd prod = ops[0] * ops[1] * ops[2];
    c.max_product_error =
        std::max(c.max_product_error, (prod - double(sq.target_signs[l]) * id).cwiseAbs().maxCoeff());
    chi += double(sq.target_signs[l]) * line_product_real(ops);
  }
  c.identity_error = (chi - 6.0 * id).cwiseAbs().maxCoeff();
  c.mixed_state_chi = chi.trace().real() / static_cast<double>(n);
  c.pass = c.max_commutator <= tol && c.max_product_error <= tol && c.identity_error <= tol;
  return c;
}

}  // namespace phasectx
