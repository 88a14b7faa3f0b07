#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "phasectx/fock.hpp"
#include "phasectx/state_spec.hpp"

using namespace phasectx;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

PMSquareSpec symmetric_square(double start = 0.0) {
  const auto t = symmetric_triple(start);
  return build_cv_square(t[0], t[1], t[2]);
}

PhaseVec random_amplitude(std::mt19937_64& rng, double max_norm) {
  std::uniform_real_distribution<double> r(0, max_norm), a(-pi, pi);
  return PhaseVec::polar(r(rng), a(rng));
}

FockState random_state(int N, int support, std::uint64_t seed) {
  return materialize(RandomState{2, support, seed}, {N, N});
}

}  // namespace

TEST_SUITE("fock") {
  TEST_CASE("zero displacement is exactly the identity") {
    for (int N : {2, 5, 64}) CHECK((displacement_matrix({0, 0}, N) - MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(displacement_matrix({1, 0}, 1), std::invalid_argument);
  }

  TEST_CASE("displacement matrices are unitary to 1e-12") {
    std::mt19937_64 rng(131);
    for (int N : {2, 3, 8, 32, 64, 96}) {
      for (int i = 0; i < 5; ++i) {
        const MatrixXcd D = displacement_matrix(random_amplitude(rng, 3.0), N);
        CHECK(oracle::max_abs(D.adjoint() * D - MatrixXcd::Identity(N, N)) <= 1e-12);
      }
    }
  }

  TEST_CASE("spectral construction equals the Taylor exponential of the same generator") {
    std::mt19937_64 rng(137);
    for (int N : {2, 7, 24, 48}) {
      for (int i = 0; i < 4; ++i) {
        const PhaseVec a = random_amplitude(rng, 2.0);
        CHECK(oracle::max_abs(displacement_matrix(a, N) - oracle::displacement(a.complex(), N)) <= 1e-11);
      }
    }
  }

  TEST_CASE("vacuum overlap is exp(-|a|^2/2)") {
    std::mt19937_64 rng(139);
    for (int i = 0; i < 50; ++i) {
      const PhaseVec a = random_amplitude(rng, 2.0);
      const MatrixXcd D = displacement_matrix(a, 64);
      CHECK(std::abs(D(0, 0) - std::exp(-0.5 * a.norm() * a.norm())) <= 1e-8);
    }
  }

  TEST_CASE("analytic matrix elements agree on the low block") {
    std::mt19937_64 rng(149);
    const int N = 64;
    for (int i = 0; i < 10; ++i) {
      const PhaseVec a = random_amplitude(rng, 2.0);
      const MatrixXcd s = displacement_matrix(a, N);
      const MatrixXcd an = displacement_matrix_analytic(a, N);
      CHECK(oracle::max_abs(s.topLeftCorner(N / 8, N / 8) - an.topLeftCorner(N / 8, N / 8)) <= 1e-10);
    }
  }

  TEST_CASE("composition carries the geometric phase on low Fock states") {
    std::mt19937_64 rng(151);
    const int N = 64;
    for (int i = 0; i < 20; ++i) {
      const PhaseVec a = random_amplitude(rng, 2.0), b = random_amplitude(rng, 2.0);
      VectorXcd v = VectorXcd::Zero(N);
      std::normal_distribution<double> g;
      for (int n = 0; n < N / 8; ++n) v(n) = cd{g(rng), g(rng)};
      v.normalize();
      const VectorXcd lhs = displacement_matrix(a, N) * (displacement_matrix(b, N) * v);
      const VectorXcd rhs = std::polar(1.0, cross(a, b)) * (displacement_matrix(a + b, N) * v);
      CHECK((lhs - rhs).norm() <= 1e-6);
    }
  }

  TEST_CASE("operators: dense form, adjoint, products, serial and parallel apply") {
    std::mt19937_64 rng(157);
    const Cutoffs cut{5, 7};
    const auto w1 = LabeledDisplacement::pair(0, random_amplitude(rng, 1), 1, random_amplitude(rng, 1)).with_phase(0.4);
    const auto w2 = LabeledDisplacement::single(1, random_amplitude(rng, 1));
    const FockOperator A = displacement_operator(w1, cut);
    const FockOperator B = displacement_operator(w2, cut);
    const MatrixXcd Ad = std::polar(1.0, 0.4) * oracle::two_mode(displacement_matrix(w1.amplitude(0), 5),
                                                                 displacement_matrix(w1.amplitude(1), 7));
    CHECK(oracle::max_abs(A.dense() - Ad) <= 1e-14);
    CHECK(oracle::max_abs(A.adjoint().dense() - Ad.adjoint()) <= 1e-14);
    CHECK(oracle::max_abs((A * B).dense() - A.dense() * B.dense()) <= 1e-13);
    CHECK(oracle::max_abs((A + cd{0, 2} * B - A).dense() - cd{0, 2} * B.dense()) <= 1e-13);
    MatrixXcd cols = MatrixXcd::Random(35, 3);
    const MatrixXcd ser = (A * B + B).apply(cols, Exec::Serial);
    const MatrixXcd par = (A * B + B).apply(cols, Exec::Parallel);
    CHECK(oracle::max_abs(ser - par) == 0.0);
    CHECK(oracle::max_abs(ser - (A * B + B).dense() * cols) <= 1e-13);
    CHECK(oracle::max_abs(FockOperator::identity(cut).apply(cols) - cols) == 0.0);
    CHECK_THROWS_AS(displacement_operator(LabeledDisplacement::single(2, {1, 0}), cut), std::invalid_argument);
  }

  TEST_CASE("apply_mode_factor is identical across execution policies") {
    std::mt19937_64 rng(163);
    const Cutoffs cut{6, 5, 4};
    const MatrixXcd cols = MatrixXcd::Random(120, 4);
    for (int mode = 0; mode < 3; ++mode) {
      const MatrixXcd f = displacement_matrix(random_amplitude(rng, 1), cut[mode]);
      MatrixXcd s = cols, p = cols;
      apply_mode_factor(f, mode, cut, s, Exec::Serial);
      apply_mode_factor(f, mode, cut, p, Exec::Parallel);
      CHECK(oracle::max_abs(s - p) == 0.0);
      CHECK(oracle::max_abs(s - FockOperator::on_mode(cut, mode, f).dense() * cols) <= 1e-13);
    }
  }

  TEST_CASE("modular parts") {
    const Cutoffs cut{16};
    const auto [ir, ii] = modular_parts(FockOperator::identity(cut));
    CHECK(oracle::max_abs(ir.dense() - MatrixXcd::Identity(16, 16)) == 0.0);
    CHECK(oracle::max_abs(ii.dense()) == 0.0);

    const FockOperator D = displacement_operator(LabeledDisplacement::single(0, {1.3, -0.4}), {64});
    const auto [ar, ai] = modular_parts(D);
    const MatrixXcd r = ar.dense(), i = ai.dense();
    CHECK(oracle::max_abs(r - r.adjoint()) <= 1e-13);
    CHECK(oracle::max_abs(i - i.adjoint()) <= 1e-13);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(r);
    CHECK(es.eigenvalues().maxCoeff() <= 1 + 1e-9);
    CHECK(es.eigenvalues().minCoeff() >= -1 - 1e-9);

    for (double x : {0.3, 1.0, 2.0}) {
      const FockState vac = materialize(vacuum_spec(1), {64});
      const auto [xr, xi] = modular_parts(displacement_operator(LabeledDisplacement::single(0, {x, 0}), {64}));
      CHECK(std::abs(vac.expectation(xr) - std::exp(-x * x / 2)) <= 1e-10);
      CHECK(std::abs(vac.expectation(xi)) <= 1e-12);
    }
  }

  TEST_CASE("modular magnitude stays within one on safe states") {
    std::mt19937_64 rng(167);
    const Cutoffs cut{64};
    for (int i = 0; i < 20; ++i) {
      const auto [r, im] = modular_parts(displacement_operator(LabeledDisplacement::single(0, random_amplitude(rng, 3)), cut));
      const FockState s = materialize(parse_state_spec(nlohmann::json{{"kind", "thermal"}, {"mean", 0.8}, {"support", 8}}, 1), cut);
      CHECK(s.truncation_safe());
      CHECK(s.expectation(r * r + im * im).real() <= 1 + 1e-9);
    }
  }

  TEST_CASE("line_apply equals the Hermitian part of the line product") {
    const auto sq = symmetric_square(0.7);
    const int N = 32;
    const Cutoffs cut{N, N};
    const FockState s = random_state(N, 4, 5);
    for (int l = 0; l < kLineCount; ++l) {
      const auto line = sq.line(l);
      const FockOperator P =
          displacement_operator(line[0], cut) * displacement_operator(line[1], cut) * displacement_operator(line[2], cut);
      const MatrixXcd compact = 0.5 * (P + P.adjoint()).apply(s.components());
      // the members commute only up to truncation, which the low support keeps near 1e-12
      CHECK(oracle::max_abs(line_apply(line, cut, s.components()) - compact) <= 1e-10);
      CHECK(oracle::max_abs(line_apply(line, cut, s.components(), Exec::Serial) -
                            line_apply(line, cut, s.components(), Exec::Parallel)) == 0.0);
    }
  }

  TEST_CASE("line members commute on safe states") {
    const auto sq = symmetric_square();
    const int N = 64;
    const Cutoffs cut{N, N};
    const FockState s = random_state(N, 8, 3);
    for (int l = 0; l < kLineCount; ++l) {
      const auto line = sq.line(l);
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
          const FockOperator A = displacement_operator(line[a], cut), B = displacement_operator(line[b], cut);
          CHECK(oracle::max_abs((A * B - B * A).apply(s.components())) <= 1e-6);
        }
    }
  }

  TEST_CASE("chi is 6 on vacuum and random states") {
    const auto sq = symmetric_square();
    const FockState vac = materialize(vacuum_spec(2), {64, 64});
    const auto e = chi_pm_expectation(sq, vac);
    CHECK(std::abs(e.value - 6.0) <= 1e-6);
    CHECK_FALSE(e.truncation_warning);
    for (int l = 0; l < 5; ++l) CHECK(e.line_values[l] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(e.line_values[5] == doctest::Approx(-1.0).epsilon(1e-9));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = chi_pm_expectation(sq, random_state(64, 8, seed));
      CHECK(std::abs(r.value - 6.0) <= 1e-5);
      CHECK(chi_pm_expectation(sq, random_state(64, 8, seed), Exec::Serial).value == r.value);
    }
  }

  TEST_CASE("operator identity: chi acts as 6 on safe states") {
    const auto sq = symmetric_square(-0.5);
    const int N = 64;
    const FockState s = random_state(N, 8, 77);
    const MatrixXcd out = chi_apply(sq, {N, N}, s.components());
    CHECK(oracle::max_abs(out - 6.0 * s.components()) <= 1e-5);
  }

  TEST_CASE("chi on a thermal mixture" * doctest::timeout(120)) {
    const auto sq = symmetric_square();
    const StateSpec thermal = parse_state_spec(nlohmann::json{{"kind", "thermal"}, {"mean", 1.0}, {"support", 16}}, 2);
    const FockState s = materialize(thermal, {64, 64});
    CHECK_FALSE(s.is_pure());
    CHECK(s.weights().size() == 256);
    const auto e = chi_pm_expectation(sq, s);
    CHECK(std::abs(e.value - 6.0) <= 1e-4);
  }

  TEST_CASE("unvalidated squares are refused") {
    auto sq = symmetric_square();
    sq.entries[0][0] = LabeledDisplacement::single(kModeA, {0.1, 0});
    CHECK_THROWS_AS(chi_pm_expectation(sq, materialize(vacuum_spec(2), {8, 8})), std::invalid_argument);
    CHECK_THROWS_AS(chi_pm_expectation(symmetric_square(), materialize(vacuum_spec(1), {8})), std::invalid_argument);
  }

  TEST_CASE("convergence scans") {
    const auto sq = symmetric_square();
    const auto vac = convergence_scan(sq, vacuum_spec(2), {16, 32, 64});
    REQUIRE(vac.size() == 3);
    for (std::size_t i = 1; i < vac.size(); ++i) CHECK(vac[i].deviation <= vac[i - 1].deviation + 1e-13);
    CHECK(vac[2].deviation <= 1e-6);

    const StateSpec coherent = parse_state_spec(nlohmann::json{{"kind", "coherent"}, {"alpha", 1.0}, {"support", 24}}, 2);
    const auto coh = convergence_scan(sq, coherent, {32, 64, 96});
    CHECK(coh.back().deviation < 1e-4);

    CHECK_THROWS_AS(convergence_scan(sq, RandomState{2, 8, 0}, {4}), std::invalid_argument);
    CHECK_THROWS_AS(convergence_scan(sq, vacuum_spec(2), {32, 16}), std::invalid_argument);
  }

  TEST_CASE("state construction and tail bookkeeping") {
    const Cutoffs cut{8};
    VectorXcd v = VectorXcd::Zero(8);
    v(0) = 1.0;
    v(6) = 1e-3;
    CHECK_THROWS_AS(FockState::pure(cut, v), std::invalid_argument);
    const FockState s = FockState::normalized(cut, v);
    CHECK(s.support(0) == 7);
    CHECK(s.mass_at_or_above(0, 4) == doctest::Approx(1e-6 / (1 + 1e-6)));
    CHECK(s.tail_mass() == doctest::Approx(1e-6 / (1 + 1e-6)));
    CHECK_FALSE(s.truncation_safe());
    const FockState big = s.embedded({32});
    CHECK(big.truncation_safe());
    CHECK(big.dimension() == 32);
    CHECK_THROWS_AS(s.embedded({4}), std::invalid_argument);
    CHECK_THROWS_AS(FockState::normalized(cut, VectorXcd::Zero(8)), std::invalid_argument);
  }

  TEST_CASE("density round trip") {
    std::mt19937_64 rng(173);
    const Cutoffs cut{4, 3};
    MatrixXcd comps(12, 2);
    comps.col(0) = VectorXcd::Random(12).normalized();
    comps.col(1) = VectorXcd::Random(12).normalized();
    const FockState m = FockState::mixture(cut, {0.25, 0.75}, comps);
    const MatrixXcd rho = m.density();
    CHECK(std::abs(rho.trace() - 1.0) <= 1e-14);
    const FockState back = FockState::from_density(cut, rho);
    CHECK(oracle::max_abs(back.density() - rho) <= 1e-12);
    CHECK_THROWS_AS(FockState::mixture(cut, {0.5, 0.6}, comps), std::invalid_argument);
    MatrixXcd bad = rho;
    bad(0, 1) += 0.1;
    CHECK_THROWS_AS(FockState::from_density(cut, bad), std::invalid_argument);
    const auto pops = m.populations(1);
    CHECK(pops.size() == 3);
    CHECK(pops[0] + pops[1] + pops[2] == doctest::Approx(1.0));
  }
}
