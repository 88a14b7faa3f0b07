#include "phasectx/state_spec.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "phasectx/exec.hpp"
#include "phasectx/fock.hpp"

namespace phasectx {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;
using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("state spec: " + what); }

void require_positive(int v, const char* key) {
  if (v < 1) bad(std::string(key) + " must be >= 1");
}

int mode_support(const ModeState& s) {
  return std::visit(overloaded{
                        [](const mode_state::Vacuum&) { return 1; },
                        [](const mode_state::Coherent& c) { return c.support; },
                        [](const mode_state::Number& f) { return f.n + 1; },
                        [](const mode_state::Thermal& t) { return t.support; },
                        [](const mode_state::Amplitudes& a) { return static_cast<int>(a.values.size()); },
                    },
                    s);
}

// Mixture over one mode: weights and normalised amplitude columns of length N.
struct ModeMixture {
  std::vector<double> weights;
  std::vector<VectorXcd> vectors;
};

ModeMixture mode_mixture(const ModeState& s, int N) {
  if (mode_support(s) > N) {
    std::ostringstream os;
    os << "state needs " << mode_support(s) << " levels but the cutoff is " << N;
    throw std::invalid_argument(os.str());
  }
  auto single = [N](auto fill) {
    VectorXcd v = VectorXcd::Zero(N);
    fill(v);
    v.normalize();
    return ModeMixture{{1.0}, {v}};
  };
  return std::visit(
      overloaded{
          [&](const mode_state::Vacuum&) { return single([](VectorXcd& v) { v(0) = 1.0; }); },
          [&](const mode_state::Coherent& c) {
            return single([&](VectorXcd& v) {
              const cd a = c.alpha.complex();
              const double x = std::norm(a);
              for (int n = 0; n < c.support; ++n) {
                // e^{-x/2} a^n / sqrt(n!)
                const double mag = n == 0 ? std::exp(-0.5 * x)
                                          : std::exp(-0.5 * x + n * std::log(std::abs(a)) - 0.5 * std::lgamma(n + 1.0));
                v(n) = a == cd{} ? (n == 0 ? cd{1.0} : cd{}) : mag * std::polar(1.0, n * std::arg(a));
              }
            });
          },
          [&](const mode_state::Number& f) { return single([&](VectorXcd& v) { v(f.n) = 1.0; }); },
          [&](const mode_state::Thermal& t) {
            ModeMixture m;
            const double q = t.mean / (1.0 + t.mean);
            double total = 0.0;
            for (int n = 0; n < t.support; ++n) total += std::pow(q, n);
            for (int n = 0; n < t.support; ++n) {
              const double w = std::pow(q, n) / total;
              if (w == 0.0) continue;
              VectorXcd v = VectorXcd::Zero(N);
              v(n) = 1.0;
              m.weights.push_back(w);
              m.vectors.push_back(v);
            }
            return m;
          },
          [&](const mode_state::Amplitudes& a) {
            return single([&](VectorXcd& v) {
              for (std::size_t n = 0; n < a.values.size(); ++n) v(static_cast<Index>(n)) = a.values[n];
              if (v.norm() == 0.0) bad("amplitudes must not all vanish");
            });
          },
      },
      s);
}

// Tensor product with mode 0 fastest.
VectorXcd kron_vec(const VectorXcd& hi, const VectorXcd& lo) {
  VectorXcd out(hi.size() * lo.size());
  for (Index i = 0; i < hi.size(); ++i) out.segment(i * lo.size(), lo.size()) = hi(i) * lo;
  return out;
}

FockState materialize_product(const ProductState& p, const Cutoffs& cutoffs) {
  if (p.modes.size() != cutoffs.size()) bad("mode count does not match the cutoffs");
  std::vector<double> weights{1.0};
  std::vector<VectorXcd> vecs{VectorXcd::Ones(1)};
  for (std::size_t m = 0; m < p.modes.size(); ++m) {
    const ModeMixture mm = mode_mixture(p.modes[m], cutoffs[m]);
    std::vector<double> w2;
    std::vector<VectorXcd> v2;
    for (std::size_t i = 0; i < weights.size(); ++i)
      for (std::size_t j = 0; j < mm.weights.size(); ++j) {
        w2.push_back(weights[i] * mm.weights[j]);
        v2.push_back(kron_vec(mm.vectors[j], vecs[i]));
      }
    weights = std::move(w2);
    vecs = std::move(v2);
  }
  MatrixXcd comps(dimension_of(cutoffs), static_cast<Index>(vecs.size()));
  for (std::size_t k = 0; k < vecs.size(); ++k) comps.col(static_cast<Index>(k)) = vecs[k];
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return FockState::mixture(cutoffs, std::move(weights), std::move(comps));
}

FockState materialize_random(const RandomState& r, const Cutoffs& cutoffs) {
  if (static_cast<int>(cutoffs.size()) != r.modes) bad("mode count does not match the cutoffs");
  for (int n : cutoffs)
    if (r.support > n) {
      std::ostringstream os;
      os << "state needs " << r.support << " levels but the cutoff is " << n;
      throw std::invalid_argument(os.str());
    }
  auto rng = stream_rng(r.seed, 0);
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXcd v = VectorXcd::Zero(dimension_of(cutoffs));
  // enumerate levels < support in every mode, mode 0 fastest
  std::vector<int> level(cutoffs.size(), 0);
  while (true) {
    Index idx = 0;
    Index stride = 1;
    for (std::size_t m = 0; m < cutoffs.size(); ++m) {
      idx += level[m] * stride;
      stride *= cutoffs[m];
    }
    const double re = g(rng);
    const double im = g(rng);
    v(idx) = cd{re, im};
    std::size_t m = 0;
    while (m < level.size() && ++level[m] == r.support) level[m++] = 0;
    if (m == level.size()) break;
  }
  return FockState::normalized(cutoffs, std::move(v));
}

ModeState parse_mode(const json& j) {
  if (!j.is_object()) bad("mode entry must be an object");
  const std::string kind = j.value("kind", std::string{});
  if (kind == "vacuum") return mode_state::Vacuum{};
  if (kind == "coherent") {
    if (!j.contains("alpha")) bad("coherent state needs \"alpha\"");
    const auto& a = j.at("alpha");
    PhaseVec alpha;
    if (a.is_number()) alpha = PhaseVec::checked(a.get<double>(), 0.0);
    else if (a.is_array() && a.size() == 2) alpha = PhaseVec::checked(a[0].get<double>(), a[1].get<double>());
    else bad("\"alpha\" must be a number or [re, im]");
    mode_state::Coherent c{alpha, j.value("support", 24)};
    require_positive(c.support, "support");
    return c;
  }
  if (kind == "fock") {
    mode_state::Number f{j.value("n", 0)};
    if (f.n < 0) bad("\"n\" must be >= 0");
    return f;
  }
  if (kind == "thermal") {
    mode_state::Thermal t{j.value("mean", 1.0), j.value("support", 16)};
    if (!(t.mean >= 0.0)) bad("\"mean\" must be >= 0");
    require_positive(t.support, "support");
    return t;
  }
  if (kind == "amplitudes") {
    if (!j.contains("values") || !j.at("values").is_array()) bad("amplitudes state needs \"values\" array");
    mode_state::Amplitudes a;
    for (const auto& v : j.at("values")) {
      if (v.is_number()) a.values.emplace_back(v.get<double>(), 0.0);
      else if (v.is_array() && v.size() == 2) a.values.emplace_back(v[0].get<double>(), v[1].get<double>());
      else bad("amplitude entries must be numbers or [re, im]");
    }
    if (a.values.empty()) bad("\"values\" must not be empty");
    return a;
  }
  bad("unknown kind \"" + kind + "\"");
}

json mode_to_json(const ModeState& s) {
  return std::visit(overloaded{
                        [](const mode_state::Vacuum&) { return json{{"kind", "vacuum"}}; },
                        [](const mode_state::Coherent& c) {
                          return json{{"kind", "coherent"}, {"alpha", {c.alpha.re, c.alpha.im}}, {"support", c.support}};
                        },
                        [](const mode_state::Number& f) { return json{{"kind", "fock"}, {"n", f.n}}; },
                        [](const mode_state::Thermal& t) {
                          return json{{"kind", "thermal"}, {"mean", t.mean}, {"support", t.support}};
                        },
                        [](const mode_state::Amplitudes& a) {
                          json vals = json::array();
                          for (const auto& v : a.values) vals.push_back({v.real(), v.imag()});
                          return json{{"kind", "amplitudes"}, {"values", vals}};
                        },
                    },
                    s);
}

}  // namespace

StateSpec vacuum_spec(int modes) {
  return ProductState{std::vector<ModeState>(static_cast<std::size_t>(modes), mode_state::Vacuum{})};
}

int mode_count(const StateSpec& spec) {
  return std::visit(overloaded{[](const ProductState& p) { return static_cast<int>(p.modes.size()); },
                               [](const RandomState& r) { return r.modes; }},
                    spec);
}

std::vector<int> required_support(const StateSpec& spec) {
  return std::visit(overloaded{[](const ProductState& p) {
                                 std::vector<int> s;
                                 for (const auto& m : p.modes) s.push_back(mode_support(m));
                                 return s;
                               },
                               [](const RandomState& r) { return std::vector<int>(r.modes, r.support); }},
                    spec);
}

StateSpec parse_state_spec(const json& j, int modes) {
  if (modes < 1) bad("mode count must be >= 1");
  if (j.is_string()) return parse_state_spec(json{{"kind", j.get<std::string>()}}, modes);
  if (!j.is_object()) bad("expected an object");
  if (j.contains("modes")) {
    const auto& arr = j.at("modes");
    if (!arr.is_array() || static_cast<int>(arr.size()) != modes) {
      std::ostringstream os;
      os << "\"modes\" must list " << modes << " entries";
      bad(os.str());
    }
    ProductState p;
    for (const auto& m : arr) p.modes.push_back(parse_mode(m));
    return p;
  }
  if (j.value("kind", std::string{}) == "random") {
    RandomState r{modes, j.value("support", 8), j.value("seed", std::uint64_t{0})};
    require_positive(r.support, "support");
    return r;
  }
  return ProductState{std::vector<ModeState>(static_cast<std::size_t>(modes), parse_mode(j))};
}

json to_json(const StateSpec& spec) {
  return std::visit(overloaded{[](const ProductState& p) {
                                 json arr = json::array();
                                 for (const auto& m : p.modes) arr.push_back(mode_to_json(m));
                                 return json{{"modes", arr}};
                               },
                               [](const RandomState& r) {
                                 return json{{"kind", "random"}, {"support", r.support}, {"seed", r.seed}};
                               }},
                    spec);
}

FockState materialize(const StateSpec& spec, const Cutoffs& cutoffs) {
  return std::visit(overloaded{[&](const ProductState& p) { return materialize_product(p, cutoffs); },
                               [&](const RandomState& r) { return materialize_random(r, cutoffs); }},
                    spec);
}

}  // namespace phasectx
