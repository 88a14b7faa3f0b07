#include <omp.h>

#include <stdexcept>
#include <unordered_map>

#include "phasectx/pm_construct.hpp"

namespace phasectx {

namespace {

std::vector<std::int64_t> values_with_parity(int K, bool odd) {
  std::vector<std::int64_t> v;
  for (std::int64_t x = -K; x <= K; ++x)
    if ((x % 2 != 0) == odd) v.push_back(x);
  return v;
}

// All values of line_form over one half of the tuple, in enumeration order.
std::vector<std::int64_t> half_forms(const ParityPattern& p, int offset, int K) {
  const auto a = values_with_parity(K, p[offset]);
  const auto b = values_with_parity(K, p[offset + 1]);
  const auto c = values_with_parity(K, p[offset + 2]);
  std::vector<std::int64_t> out;
  out.reserve(a.size() * b.size() * c.size());
  for (auto x : a)
    for (auto y : b)
      for (auto z : c) out.push_back(line_form(x, y, z));
  return out;
}

std::int64_t tuple_count(const ParityPattern& p, int K) {
  std::int64_t n = 1;
  for (bool odd : p) n *= static_cast<std::int64_t>(values_with_parity(K, odd).size());
  return n;
}

}  // namespace

std::int64_t count_identity_solutions(const ParityPattern& pattern, int K, Exec exec) {
  if (K < 1) throw std::invalid_argument("obstruction search needs K >= 1");
  // Each half is tabulated once; the double loop still visits every 6-tuple.
  const auto lhs = half_forms(pattern, 0, K);
  const auto rhs = half_forms(pattern, 3, K);
  const auto nl = static_cast<std::int64_t>(lhs.size());
  const auto nr = static_cast<std::int64_t>(rhs.size());

  std::int64_t count = 0;
  if (exec == Exec::Serial) {
    for (std::int64_t i = 0; i < nl; ++i)
      for (std::int64_t j = 0; j < nr; ++j) count += (lhs[i] == rhs[j]);
    return count;
  }
#pragma omp parallel for reduction(+ : count) schedule(static)
  for (std::int64_t i = 0; i < nl; ++i) {
    const std::int64_t v = lhs[i];
    std::int64_t local = 0;
    for (std::int64_t j = 0; j < nr; ++j) local += (v == rhs[j]);
    count += local;
  }
  return count;
}

std::int64_t count_identity_solutions_split(const ParityPattern& pattern, int K) {
  if (K < 1) throw std::invalid_argument("obstruction search needs K >= 1");
  std::unordered_map<std::int64_t, std::int64_t> hist;
  for (auto v : half_forms(pattern, 0, K)) ++hist[v];
  std::int64_t count = 0;
  for (auto v : half_forms(pattern, 3, K)) {
    auto it = hist.find(v);
    if (it != hist.end()) count += it->second;
  }
  return count;
}

bool ObstructionReport::no_solution() const {
  if (square_pattern.solutions != 0) return false;
  for (const auto& p : three_three)
    if (p.solutions != 0) return false;
  return true;
}

ObstructionReport obstruction_search(int K, Exec exec) {
  if (K < 1) throw std::invalid_argument("obstruction search needs K >= 1");
  ObstructionReport rep;
  rep.K = K;

  rep.square_pattern.pattern = {false, false, false, false, false, true};
  rep.square_pattern.tuples = tuple_count(rep.square_pattern.pattern, K);
  rep.square_pattern.solutions = count_identity_solutions(rep.square_pattern.pattern, K, exec);

  for (int mask = 0; mask < 64; ++mask) {
    if (__builtin_popcount(mask) != 3) continue;
    PatternCount pc;
    for (int i = 0; i < 6; ++i) pc.pattern[i] = (mask >> i) & 1;
    pc.tuples = tuple_count(pc.pattern, K);
    pc.solutions = count_identity_solutions_split(pc.pattern, K);
    rep.three_three.push_back(pc);
  }

  rep.all_even.pattern = {};
  rep.all_even.tuples = tuple_count(rep.all_even.pattern, K);
  rep.all_even.solutions = count_identity_solutions_split(rep.all_even.pattern, K);
  return rep;
}

}  // namespace phasectx
