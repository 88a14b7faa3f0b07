#include "phasectx/nchv_bound.hpp"

#include <omp.h>

#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace phasectx {

using cd = std::complex<double>;
using std::numbers::pi;

const std::array<std::array<int, 3>, 6>& line_cells() {
  static const std::array<std::array<int, 3>, 6> cells = [] {
    std::array<std::array<int, 3>, 6> c{};
    for (int j = 0; j < 3; ++j) c[j] = {cell_index(j, 0), cell_index(j, 1), cell_index(j, 2)};
    for (int k = 0; k < 3; ++k) c[3 + k] = {cell_index(0, k), cell_index(1, k), cell_index(2, k)};
    return c;
  }();
  return cells;
}

bool AssignmentVector::in_cube() const {
  for (int i = 0; i < kCells; ++i)
    if (std::abs(x[i]) > 1.0 || std::abs(y[i]) > 1.0) return false;
  return true;
}

bool AssignmentVector::in_ball() const {
  for (int i = 0; i < kCells; ++i)
    if (radius_sq(i) > 1.0 + 1e-12) return false;
  return true;
}

AssignmentVector AssignmentVector::from_angles(const std::array<double, kCells>& theta) {
  AssignmentVector X;
  for (int i = 0; i < kCells; ++i) {
    X.x[i] = std::cos(theta[i]);
    X.y[i] = std::sin(theta[i]);
  }
  return X;
}

AssignmentVector AssignmentVector::uniform_cube(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AssignmentVector X;
  for (int i = 0; i < kCells; ++i) X.x[i] = u(rng);
  for (int i = 0; i < kCells; ++i) X.y[i] = u(rng);
  return X;
}

std::array<double, 6> line_values(const AssignmentVector& X) {
  std::array<double, 6> v{};
  const auto& lines = line_cells();
  for (int l = 0; l < 6; ++l) {
    const auto [p, q, r] = lines[l];
    v[l] = (X.x[p] * X.x[q] - X.y[p] * X.y[q]) * X.x[r] - (X.y[p] * X.x[q] + X.x[p] * X.y[q]) * X.y[r];
  }
  return v;
}

double eval_F(const AssignmentVector& X) {
  const auto v = line_values(X);
  double f = 0.0;
  for (int l = 0; l < 6; ++l) f += kLineSigns[l] * v[l];
  return f;
}

double eval_punished(const AssignmentVector& X, double lambda) {
  double p = 0.0;
  for (int i = 0; i < kCells; ++i) p += std::abs(X.radius_sq(i) - 1.0);
  return eval_F(X) - lambda * p;
}

namespace {

cd cell(const AssignmentVector& X, int i) { return {X.x[i], X.y[i]}; }

// F = Re(a_i w_i) + (terms without cell i).
cd cell_coefficient(const AssignmentVector& X, int i) {
  cd w = 0.0;
  const auto& lines = line_cells();
  for (int l = 0; l < 6; ++l) {
    const auto& c = lines[l];
    cd others = kLineSigns[l];
    bool member = false;
    for (int t = 0; t < 3; ++t) {
      if (c[t] == i) member = true;
      else others *= cell(X, c[t]);
    }
    if (member) w += others;
  }
  return w;
}

}  // namespace

AssignmentVector grad_F(const AssignmentVector& X) {
  AssignmentVector g;
  for (int i = 0; i < kCells; ++i) {
    const cd w = cell_coefficient(X, i);
    g.x[i] = w.real();
    g.y[i] = -w.imag();
  }
  return g;
}

double cell_line_sum(const AssignmentVector& X, int i) {
  return (cell(X, i) * cell_coefficient(X, i)).real();
}

// ---------------------------------------------------------------- vertices

namespace {

template <int Bits, typename Decode>
VertexMax vertex_scan(Exec exec, Decode decode) {
  constexpr std::int64_t count = std::int64_t{1} << Bits;
  auto better = [](double v, std::int64_t m, double bv, std::int64_t bm) {
    return v > bv || (v == bv && m < bm);
  };
  double best = -std::numeric_limits<double>::infinity();
  std::int64_t best_mask = 0;
  if (exec == Exec::Serial) {
    for (std::int64_t m = 0; m < count; ++m) {
      const double v = eval_F(decode(m));
      if (better(v, m, best, best_mask)) {
        best = v;
        best_mask = m;
      }
    }
  } else {
#pragma omp parallel
    {
      double lb = -std::numeric_limits<double>::infinity();
      std::int64_t lm = 0;
#pragma omp for schedule(static) nowait
      for (std::int64_t m = 0; m < count; ++m) {
        const double v = eval_F(decode(m));
        if (better(v, m, lb, lm)) {
          lb = v;
          lm = m;
        }
      }
#pragma omp critical
      if (better(lb, lm, best, best_mask)) {
        best = lb;
        best_mask = lm;
      }
    }
  }
  return {best, decode(best_mask)};
}

double bit_sign(std::int64_t mask, int bit) { return ((mask >> bit) & 1) ? -1.0 : 1.0; }

}  // namespace

VertexMax vertex_max_F(Exec exec) {
  return vertex_scan<18>(exec, [](std::int64_t m) {
    AssignmentVector X;
    for (int i = 0; i < kCells; ++i) {
      X.x[i] = bit_sign(m, i);
      X.y[i] = bit_sign(m, kCells + i);
    }
    return X;
  });
}

VertexMax vertex_max_F_real(Exec exec) {
  return vertex_scan<9>(exec, [](std::int64_t m) {
    AssignmentVector X;
    for (int i = 0; i < kCells; ++i) X.x[i] = bit_sign(m, i);
    return X;
  });
}

VertexMax vertex_max_F_imag(Exec exec) {
  return vertex_scan<9>(exec, [](std::int64_t m) {
    AssignmentVector X;
    for (int i = 0; i < kCells; ++i) X.y[i] = bit_sign(m, i);
    return X;
  });
}

// ------------------------------------------------------------------- torus

namespace {

double torus_value(const std::array<double, kCells>& theta) {
  return eval_F(AssignmentVector::from_angles(theta));
}

std::array<double, kCells> torus_gradient(const std::array<double, kCells>& theta) {
  const AssignmentVector X = AssignmentVector::from_angles(theta);
  const AssignmentVector g = grad_F(X);
  std::array<double, kCells> out{};
  for (int i = 0; i < kCells; ++i) out[i] = -X.y[i] * g.x[i] + X.x[i] * g.y[i];
  return out;
}

template <typename Body>
std::vector<OptimumResult> run_restarts(int restarts, Exec exec, Body body) {
  std::vector<OptimumResult> runs(static_cast<std::size_t>(restarts));
  if (exec == Exec::Serial) {
    for (int r = 0; r < restarts; ++r) runs[r] = body(r);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < restarts; ++r) runs[r] = body(r);
  }
  return runs;
}

OptimumResult best_of(const std::vector<OptimumResult>& runs) {
  OptimumResult best = runs.front();
  for (const auto& r : runs)
    if (r.value > best.value) best = r;
  best.restarts = static_cast<int>(runs.size());
  return best;
}

}  // namespace

OptimumResult torus_ascent(std::array<double, kCells> theta) {
  double value = torus_value(theta);
  double step = 1.0;
  for (int iter = 0; iter < 20000; ++iter) {
    const auto g = torus_gradient(theta);
    double gn2 = 0.0;
    for (double v : g) gn2 += v * v;
    if (gn2 < 1e-26) break;
    bool accepted = false;
    while (step > 1e-14) {
      std::array<double, kCells> trial = theta;
      for (int i = 0; i < kCells; ++i) trial[i] += step * g[i];
      const double tv = torus_value(trial);
      if (tv >= value + 1e-4 * step * gn2) {
        theta = trial;
        value = tv;
        accepted = true;
        step = std::min(step * 2.0, 4.0);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return {value, AssignmentVector::from_angles(theta), 1};
}

OptimumResult constrained_max(int restarts, std::uint64_t seed, Exec exec) {
  if (restarts < 1) throw std::invalid_argument("constrained_max needs restarts >= 1");
  auto runs = run_restarts(restarts, exec, [seed](int r) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
    std::array<double, kCells> theta{};
    for (auto& t : theta) t = u(rng);
    return torus_ascent(theta);
  });
  return best_of(runs);
}

// ---------------------------------------------------------------- punished

namespace {

// Exact maximiser of Re(a w) - lambda |(|a|^2 - 1)| over the square |x|,|y| <= 1.
cd best_cell_value(cd w, double lambda, cd current) {
  auto h = [&](cd a) { return (a * w).real() - lambda * std::abs(std::norm(a) - 1.0); };
  cd best = current;
  double best_h = h(current);
  auto consider = [&](cd a) {
    if (std::abs(a.real()) > 1.0 || std::abs(a.imag()) > 1.0) return;
    const double v = h(a);
    if (v > best_h) {
      best_h = v;
      best = a;
    }
  };
  const double gx = w.real();
  const double gy = -w.imag();
  const double wn = std::abs(w);
  consider({0.0, 0.0});
  if (wn > 0.0) {
    const cd dir{gx / wn, gy / wn};
    consider(dir);  // best point on the unit circle
    if (lambda > 0.0 && wn / (2.0 * lambda) > 1.0) consider(dir * (wn / (2.0 * lambda)));
  } else {
    consider({1.0, 0.0});
  }
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) consider({sx, sy});
  if (lambda > 0.0) {
    // edges x = +-1 and y = +-1: concave in the free coordinate
    for (double s : {-1.0, 1.0}) {
      consider({s, std::clamp(gy / (2.0 * lambda), -1.0, 1.0)});
      consider({std::clamp(gx / (2.0 * lambda), -1.0, 1.0), s});
    }
  }
  return best;
}

OptimumResult block_ascent(AssignmentVector X, double lambda) {
  double value = eval_punished(X, lambda);
  int stall = 0;
  for (int sweep = 0; sweep < 50000 && stall < 3; ++sweep) {
    for (int i = 0; i < kCells; ++i) {
      const cd a = best_cell_value(cell_coefficient(X, i), lambda, cell(X, i));
      X.x[i] = a.real();
      X.y[i] = a.imag();
    }
    const double next = eval_punished(X, lambda);
    stall = (next - value <= 1e-15) ? stall + 1 : 0;
    value = std::max(value, next);
  }
  return {eval_punished(X, lambda), X, 1};
}

constexpr std::int64_t kBlock = 4096;

}  // namespace

OptimumResult maximize_punished(double lambda, int restarts, std::uint64_t seed, Exec exec) {
  if (restarts < 1) throw std::invalid_argument("maximize_punished needs restarts >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("maximize_punished needs lambda >= 0");
  auto runs = run_restarts(restarts, exec, [&](int r) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(r));
    return block_ascent(AssignmentVector::uniform_cube(rng), lambda);
  });
  return best_of(runs);
}

SampleMax sample_punished_max(double lambda, std::int64_t samples, std::uint64_t seed, Exec exec) {
  const std::int64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<SampleMax> per(static_cast<std::size_t>(std::max<std::int64_t>(blocks, 0)));
  auto run_block = [&](std::int64_t b) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(b));
    SampleMax m{-std::numeric_limits<double>::infinity(), {}, 0};
    const std::int64_t end = std::min(samples, (b + 1) * kBlock);
    for (std::int64_t s = b * kBlock; s < end; ++s) {
      const AssignmentVector X = AssignmentVector::uniform_cube(rng);
      const double v = eval_punished(X, lambda);
      if (v > m.value) {
        m.value = v;
        m.argmax = X;
      }
      ++m.samples;
    }
    per[b] = m;
  };
  if (exec == Exec::Serial) {
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
  }
  SampleMax out{-std::numeric_limits<double>::infinity(), {}, 0};
  for (const auto& m : per) {
    if (m.value > out.value) {
      out.value = m.value;
      out.argmax = m.argmax;
    }
    out.samples += m.samples;
  }
  return out;
}

PunishedMax punished_max(double lambda, std::int64_t samples, int restarts, std::uint64_t seed, Exec exec) {
  if (!(lambda >= 2.0))
    throw std::domain_error("punished_max: the classical bound 3*sqrt(3) is only established for lambda >= 2");
  PunishedMax out;
  out.optimiser = maximize_punished(lambda, restarts, seed, exec);
  out.sampling = sample_punished_max(lambda, samples, seed ^ 0x5bd1e995ULL, exec);
  out.value = std::max(out.optimiser.value, out.sampling.value);
  return out;
}

// ------------------------------------------------------------- derivatives

double directional_derivative_check(const AssignmentVector& X, double lambda) {
  double worst = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (int i = 0; i < kCells; ++i) {
    const double r2 = X.radius_sq(i);
    if (r2 <= 1.0) continue;
    any = true;
    const double r = std::sqrt(r2);
    worst = std::max(worst, cell_line_sum(X, i) / r - 2.0 * lambda * r);
  }
  if (!any) throw std::invalid_argument("directional_derivative_check: no cell outside the unit disk");
  return worst;
}

double radial_derivative_from_gradient(const AssignmentVector& X, double lambda, int i) {
  const AssignmentVector g = grad_F(X);
  const double r2 = X.radius_sq(i);
  const double r = std::sqrt(r2);
  const double dF = (g.x[i] * X.x[i] + g.y[i] * X.y[i]) / r;
  // d/dr |r^2 - 1| = 2r outside the disk, -2r inside
  const double dP = r2 > 1.0 ? 2.0 * r : -2.0 * r;
  return dF - lambda * dP;
}

DirectionalSweep directional_sweep(double lambda, std::int64_t points, std::uint64_t seed, Exec exec) {
  const std::int64_t blocks = (points + kBlock - 1) / kBlock;
  std::vector<DirectionalSweep> per(static_cast<std::size_t>(std::max<std::int64_t>(blocks, 0)));
  auto run_block = [&](std::int64_t b) {
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(b));
    DirectionalSweep s{-std::numeric_limits<double>::infinity(), {}, 0};
    const std::int64_t end = std::min(points, (b + 1) * kBlock);
    for (std::int64_t p = b * kBlock; p < end; ++p) {
      AssignmentVector X;
      do {
        X = AssignmentVector::uniform_cube(rng);
      } while (X.in_ball());
      const double v = directional_derivative_check(X, lambda);
      if (v > s.max_derivative) {
        s.max_derivative = v;
        s.worst = X;
      }
      ++s.points;
    }
    per[b] = s;
  };
  if (exec == Exec::Serial) {
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
  }
  DirectionalSweep out{-std::numeric_limits<double>::infinity(), {}, 0};
  for (const auto& s : per) {
    if (s.max_derivative > out.max_derivative) {
      out.max_derivative = s.max_derivative;
      out.worst = s.worst;
    }
    out.points += s.points;
  }
  return out;
}

}  // namespace phasectx
