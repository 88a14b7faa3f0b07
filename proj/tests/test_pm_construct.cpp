#include <doctest.h>

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "phasectx/discrete_weyl.hpp"
#include "phasectx/pm_construct.hpp"

using namespace phasectx;
using std::numbers::pi;

namespace {

PMSquareSpec symmetric_square(double start = 0.0) {
  const auto t = symmetric_triple(start);
  return build_cv_square(t[0], t[1], t[2]);
}

double det(PhaseVec a, PhaseVec b) { return a.re * b.im - a.im * b.re; }

}  // namespace

TEST_SUITE("pm_construct") {
  TEST_CASE("the symmetric square has the expected layout and validates") {
    const auto t = symmetric_triple();
    const auto sq = build_cv_square(t[0], t[1], t[2]);
    CHECK(sq.entries[0][0] == LabeledDisplacement::single(kModeA, -t[0]));
    CHECK(sq.entries[1][0] == LabeledDisplacement::single(kModeB, -t[1]));
    CHECK(sq.entries[2][2] == LabeledDisplacement::pair(kModeA, t[2], kModeB, t[2]));
    CHECK(sq.target_signs == std::array<int, 6>{1, 1, 1, 1, 1, -1});

    const auto rep = validate_square(sq);
    CHECK(rep.pass);
    CHECK(rep.sign_product_negative);
    for (int l = 0; l < kLineCount; ++l) CHECK(rep.lines[l].pass);
    CHECK(phase_distance(rep.lines[5].product_phase, pi) <= 1e-12);
    for (int l = 0; l < 5; ++l) CHECK(std::abs(rep.lines[l].product_phase) <= 1e-12);
  }

  TEST_CASE("rotated and reflected triples still validate") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (int i = 0; i < 50; ++i) {
      auto t = symmetric_triple(u(rng));
      CHECK(validate_square(build_cv_square(t[0], t[1], t[2])).pass);
      for (auto& a : t) a = {a.re, -a.im};
      const auto rep = validate_square(build_cv_square(t[0], t[1], t[2]));
      CHECK(rep.pass);
      CHECK(phase_distance(rep.lines[5].product_phase, pi) <= 1e-12);
    }
  }

  TEST_CASE("line products act as sign times identity on low Fock states") {
    const int N = 48;
    const auto sq = symmetric_square(0.3);
    std::mt19937_64 rng(43);
    const Eigen::VectorXcd v = oracle::low_fock_vector(N, N / 8, rng);
    for (int l = 0; l < kLineCount; ++l) {
      const auto line = sq.line(l);
      Eigen::VectorXcd w = v;
      for (int k = 2; k >= 0; --k)
        w = oracle::two_mode(oracle::displacement(line[k].amplitude(kModeA).complex(), N),
                             oracle::displacement(line[k].amplitude(kModeB).complex(), N)) *
            w;
      CHECK((w - sq.target_signs[l] * v).norm() <= 1e-6);
    }
  }

  TEST_CASE("violating triples are rejected with residuals") {
    const auto t = symmetric_triple();
    CHECK_THROWS_AS(build_cv_square(t[0], t[1], t[2] + PhaseVec{0.1, 0}), TripleRejected);
    try {
      build_cv_square({1, 0}, {0, 1}, {-1, -1});
      FAIL("expected rejection");
    } catch (const TripleRejected& e) {
      CHECK(e.violation().residuals[0] == doctest::Approx(-1 + pi / 2));
      CHECK(e.violation().closure == 0.0);
    }
  }

  TEST_CASE("replacing entries breaks validation") {
    const auto t = symmetric_triple();
    // D1(2 a1) still commutes within its lines but no longer closes them
    auto doubled = symmetric_square();
    doubled.entries[0][0] = LabeledDisplacement::single(kModeA, 2.0 * t[0]);
    const auto r1 = validate_square(doubled);
    CHECK_FALSE(r1.pass);
    CHECK(r1.lines[0].commute);
    CHECK(r1.lines[3].commute);
    CHECK(r1.lines[3].amplitude_residual == doctest::Approx(3.0 * symmetric_length()));

    // D1(a2) anticommutes with D1(a1) D2(a2) in the first column
    auto swapped = symmetric_square();
    swapped.entries[0][0] = LabeledDisplacement::single(kModeA, t[1]);
    const auto r2 = validate_square(swapped);
    CHECK_FALSE(r2.lines[3].commute);
    CHECK(phase_distance(r2.lines[3].commutation_phases[2], pi) <= 1e-12);
  }

  TEST_CASE("the two-qubit square lifted from d = 2 validates") {
    const HWTriple tri{HWLabel::make(1, 0, 2), HWLabel::make(0, 1, 2), HWLabel::make(1, 1, 2)};
    const auto lift = lift_triple(tri);
    REQUIRE(lift.has_value());
    std::array<PhaseVec, 3> a;
    for (int i = 0; i < 3; ++i) a[i] = induced_amplitude((*lift)[i][0], (*lift)[i][1], 2);
    REQUIRE(satisfied(check_triple(a[0], a[1], a[2])));
    CHECK(validate_square(build_cv_square(a[0], a[1], a[2])).pass);
  }

  TEST_CASE("single_mode_identity") {
    CHECK(single_mode_identity({0, 0, 0, 0, 0, 0}));
    CHECK_FALSE(single_mode_identity({2, 2, 2, 2, 2, 1}));
    std::mt19937_64 rng(47);
    std::uniform_int_distribution<int> u(-50, 50);
    for (int i = 0; i < 5000; ++i) {
      std::array<std::int64_t, 6> k;
      for (auto& x : k) x = u(rng);
      const auto side = [](std::int64_t a, std::int64_t b, std::int64_t c) {
        return (a - b) * (a - b) + (a - c) * (a - c) + (b - c) * (b - c) - a * a - b * b - c * c;
      };
      CHECK(single_mode_identity(k) == (side(k[0], k[1], k[2]) == side(k[3], k[4], k[5])));
    }
  }

  TEST_CASE("the integer identity holds for k values of any closed single-mode grid") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> g;
    for (int i = 0; i < 1000; ++i) {
      const PhaseVec a11{g(rng), g(rng)}, a12{g(rng), g(rng)}, a21{g(rng), g(rng)}, a22{g(rng), g(rng)};
      const PhaseVec a13 = -a11 - a12, a23 = -a21 - a22, a31 = -a11 - a21, a32 = -a12 - a22;
      const double k[6] = {det(a11, a12), det(a21, a22), det(a31, a32), det(a11, a21), det(a12, a22), det(a13, a23)};
      const auto form = [](double a, double b, double c) {
        return (a - b) * (a - b) + (a - c) * (a - c) + (b - c) * (b - c) - a * a - b * b - c * c;
      };
      CHECK(form(k[0], k[1], k[2]) == doctest::Approx(form(k[3], k[4], k[5])).epsilon(1e-10).scale(1.0));
    }
  }

  TEST_CASE("obstruction search at small and desk-scale K") {
    for (int K : {1, 5, 12, 30}) {
      const auto rep = obstruction_search(K);
      CHECK(rep.no_solution());
      CHECK(rep.square_pattern.solutions == 0);
      CHECK(rep.square_pattern.pattern == ParityPattern{false, false, false, false, false, true});
      CHECK(rep.three_three.size() == 20);
      for (const auto& p : rep.three_three) CHECK(p.solutions == 0);
      CHECK(rep.all_even.solutions >= 1);
    }
  }

  TEST_CASE("obstruction counts agree between brute force, OpenMP and the split count") {
    const ParityPattern all_even{};
    const ParityPattern mixed{false, true, false, true, true, false};
    for (const auto& p : {all_even, mixed}) {
      const auto serial = count_identity_solutions(p, 5, Exec::Serial);
      CHECK(serial == count_identity_solutions(p, 5, Exec::Parallel));
      CHECK(serial == count_identity_solutions_split(p, 5));
    }
    // frozen from an independent histogram count of the two half-forms
    CHECK(count_identity_solutions(all_even, 5, Exec::Serial) == 1473);
    CHECK(count_identity_solutions(mixed, 5, Exec::Serial) == 0);
  }

  TEST_CASE("single-mode layout at budget 10") {
    const auto lay = approx_single_mode(10.0);
    CHECK(lay.s == 15);
    CHECK(lay.r == 13);
    CHECK(lay.ell == doctest::Approx(std::sqrt(15 * pi)));
    CHECK(lay.max_length() <= 10.0);
    CHECK(lay.k_values[3] == doctest::Approx(12.990).epsilon(0.001 / 12.99));
    CHECK(lay.k_values[4] == doctest::Approx(15 * std::sqrt(0.75)));
    CHECK(lay.k_values[5] == doctest::Approx(30 * std::sqrt(0.75)));
    CHECK(lay.k_ideal == std::array<int, 6>{15, 15, 15, 13, 13, 26});
    const double l = lay.ell;
    CHECK(lay.vectors[0][0] == PhaseVec{0, l});
    CHECK(lay.vectors[0][1] == PhaseVec{-l, 0});
    CHECK(lay.vectors[0][2] == PhaseVec{l, -l});
    for (int r = 0; r < 3; ++r) {
      const PhaseVec sum = lay.vectors[r][0] + lay.vectors[r][1] + lay.vectors[r][2];
      CHECK(sum.norm() <= 1e-12);
      CHECK(std::abs(det(lay.vectors[r][0], lay.vectors[r][1])) == doctest::Approx(lay.s * pi));
    }
    for (int r = 1; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        const PhaseVec rot = lay.vectors[0][c].rotated(2 * pi * r / 3);
        CHECK((rot - lay.vectors[r][c]).norm() <= 1e-12);
      }
  }

  TEST_CASE("single-mode layout validates rows exactly and columns to the deviation") {
    const auto lay = approx_single_mode(10.0);
    const auto rep = validate_square(to_square(lay));
    for (int l = 0; l < 3; ++l) CHECK(rep.lines[l].pass);
    for (int l = 3; l < 6; ++l) {
      CHECK(rep.lines[l].amplitude_residual <= 1e-12);
      CHECK(rep.lines[l].phase_residual == doctest::Approx(pi * std::abs(lay.deviations[l])).epsilon(1e-9));
    }
  }

  TEST_CASE("single-mode budget edges") {
    const auto smallest = approx_single_mode(std::sqrt(2 * pi) * 1.01);
    CHECK(smallest.s == 1);
    CHECK(smallest.r == 1);
    CHECK(smallest.k_values[3] == doctest::Approx(std::sqrt(0.75)));
    CHECK_THROWS_AS(approx_single_mode(std::sqrt(2 * pi) * 0.99), std::domain_error);
  }

  TEST_CASE("deviation never grows with the budget") {
    double prev = 1.0;
    for (double budget : {5.0, 10.0, 20.0, 40.0}) {
      const auto lay = approx_single_mode(budget);
      const double dev = std::abs(lay.s * std::sqrt(0.75) - lay.r);
      CHECK(dev <= prev);
      prev = dev;
    }
    // the next improvement after s = 15 needs s = 209
    CHECK(approx_single_mode(20.0).s == 15);
    CHECK(approx_single_mode(40.0).s == 209);
    CHECK(approx_single_mode(40.0).r == 181);
  }
}
