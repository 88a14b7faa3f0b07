// phasectx: command-line front end.
//
// Exit codes: 0 all checks passed, 1 a validation or physics check failed,
// 2 the configuration was rejected.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phasectx/discrete_weyl.hpp"
#include "phasectx/drive.hpp"
#include "phasectx/exec.hpp"
#include "phasectx/fock.hpp"
#include "phasectx/nchv_bound.hpp"
#include "phasectx/phase_algebra.hpp"
#include "phasectx/pm_construct.hpp"
#include "phasectx/ramsey.hpp"
#include "phasectx/state_spec.hpp"

namespace {

using json = nlohmann::json;
using namespace phasectx;
using std::numbers::pi;

constexpr int kExitPass = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

constexpr const char* kVersion = "1.0.0";
const std::vector<std::string> kCommands{"pm-cv", "bound", "discrete", "single-mode", "ramsey"};

/// Rejected configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Report {
  json result = json::object();
  bool pass = true;
  std::optional<std::string> csv;  ///< tabular payload when CSV output is requested
};

// ------------------------------------------------------------------ output

double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

json rounded(const json& j) {
  if (j.is_number_float()) return round12(j.get<double>());
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(rounded(v));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = rounded(it.value());
    return out;
  }
  return j;
}

std::string timestamp_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json vec(PhaseVec v) { return json::array({v.re, v.im}); }

std::string csv_line(const std::vector<double>& values) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g", values[i]);
    out += (i ? "," : "") + std::string(buf);
  }
  return out + "\n";
}

// ------------------------------------------------------------------ inputs

PhaseVec parse_pair(const std::string& text) {
  std::istringstream is(text);
  double re = 0.0;
  double im = 0.0;
  char comma = 0;
  if (!(is >> re >> comma >> im) || comma != ',') throw ConfigError("expected re,im but got \"" + text + "\"");
  std::string rest;
  if (is >> rest) throw ConfigError("trailing characters in \"" + text + "\"");
  return PhaseVec::checked(re, im);
}

std::array<PhaseVec, 3> parse_triple(const std::string& text) {
  std::array<PhaseVec, 3> out{};
  std::istringstream is(text);
  std::string part;
  int n = 0;
  while (std::getline(is, part, ';')) {
    if (n == 3) throw ConfigError("--triple takes exactly three re,im pairs separated by ';'");
    out[n++] = parse_pair(part);
  }
  if (n != 3) throw ConfigError("--triple takes exactly three re,im pairs separated by ';'");
  return out;
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + " is not valid JSON: " + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

StateSpec state_from_text(const std::string& text, int modes) {
  if (text.empty()) return vacuum_spec(modes);
  json j = !text.empty() && (text.front() == '{' || text.front() == '"') ? parse_json_text(text, "--state")
                                                                         : json(text);
  try {
    return parse_state_spec(j, modes);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

/// Inserts the keys of a JSON config file as long options right after the
/// subcommand. Options given explicitly on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (path.empty()) return args;
  const json cfg = read_json_file(path);
  if (!cfg.is_object()) throw ConfigError("config file must hold a JSON object");

  auto given = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  std::vector<std::string> extra;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string& key = it.key();
    if (key == "command" || given(key)) continue;
    const json& v = it.value();
    if (v.is_boolean()) {
      if (v.get<bool>()) extra.push_back("--" + key);
    } else if (v.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
      extra.push_back("--" + key);
      extra.push_back(joined);
    } else if (v.is_string()) {
      extra.push_back("--" + key);
      extra.push_back(v.get<std::string>());
    } else if (v.is_number()) {
      extra.push_back("--" + key);
      extra.push_back(v.dump());
    } else {
      extra.push_back("--" + key);
      extra.push_back(v.dump());
    }
  }
  auto pos = args.end();
  for (auto it = args.begin() + 1; it != args.end(); ++it)
    if (std::find(kCommands.begin(), kCommands.end(), *it) != kCommands.end()) {
      pos = it + 1;
      break;
    }
  if (pos == args.end() && cfg.contains("command") && cfg["command"].is_string()) {
    args.push_back(cfg["command"].get<std::string>());
    pos = args.end();
  }
  args.insert(pos, extra.begin(), extra.end());
  return args;
}

// ----------------------------------------------------------------- pm-cv

struct PmCvOptions {
  std::string triple;
  double start_angle = 0.0;
  int cutoff = 64;
  int random_states = 20;
  int support = 8;
  std::uint64_t seed = 2024;
  std::string state;
  std::vector<int> scan_cutoffs;
  std::string scan_state;
  double tolerance = 1e-5;
};

json line_report_json(const LineReport& l, int index) {
  return {{"line", line_name(index)},
          {"commutation_phases", l.commutation_phases},
          {"commute", l.commute},
          {"amplitude_residual", l.amplitude_residual},
          {"product_phase", l.product_phase},
          {"expected_phase", l.expected_phase},
          {"phase_residual", l.phase_residual},
          {"pass", l.pass}};
}

Report cmd_pm_cv(const PmCvOptions& o) {
  if (o.cutoff < 2) throw ConfigError("--cutoff must be >= 2");
  if (o.random_states < 0) throw ConfigError("--random-states must be >= 0");
  if (o.support < 1) throw ConfigError("--support must be >= 1");
  const auto amps = o.triple.empty() ? symmetric_triple(o.start_angle) : parse_triple(o.triple);
  Report rep;
  rep.result["triple"] = json::array({vec(amps[0]), vec(amps[1]), vec(amps[2])});

  const TripleCheck check = check_triple(amps[0], amps[1], amps[2]);
  if (const auto* v = std::get_if<TripleViolated>(&check)) {
    rep.result["triple_check"] = {{"satisfied", false}, {"residuals", v->residuals}, {"closure", v->closure}};
    rep.pass = false;
    return rep;
  }
  rep.result["triple_check"] = {{"satisfied", true}, {"sign", std::get<TripleSatisfied>(check).sign}};

  const PMSquareSpec square = build_cv_square(amps[0], amps[1], amps[2]);
  const ValidationReport val = validate_square(square);
  json lines = json::array();
  for (int l = 0; l < kLineCount; ++l) lines.push_back(line_report_json(val.lines[l], l));
  rep.result["validation"] = {{"lines", lines}, {"sign_product_negative", val.sign_product_negative}, {"pass", val.pass}};
  rep.pass = val.pass;
  if (!val.pass) return rep;

  const Cutoffs cut{o.cutoff, o.cutoff};
  std::vector<std::pair<std::string, StateSpec>> states{{"vacuum", vacuum_spec(2)}};
  for (int k = 0; k < o.random_states; ++k)
    states.emplace_back("random-" + std::to_string(k), RandomState{2, o.support, o.seed + static_cast<std::uint64_t>(k)});
  if (!o.state.empty()) states.emplace_back("configured", state_from_text(o.state, 2));

  json evals = json::array();
  double worst = 0.0;
  for (const auto& [name, spec] : states) {
    FockState s = [&] {
      try {
        return materialize(spec, cut);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(name + ": " + e.what());
      }
    }();
    const ChiEvaluation e = chi_pm_expectation(square, s);
    worst = std::max(worst, std::abs(e.value - 6.0));
    evals.push_back({{"state", name},
                     {"chi", e.value},
                     {"deviation", std::abs(e.value - 6.0)},
                     {"line_values", e.line_values},
                     {"tail_mass", e.tail_mass},
                     {"truncation_warning", e.truncation_warning}});
  }
  rep.result["cutoff"] = o.cutoff;
  rep.result["evaluations"] = evals;
  rep.result["max_deviation"] = worst;
  rep.result["tolerance"] = o.tolerance;
  rep.pass = rep.pass && worst <= o.tolerance;

  if (!o.scan_cutoffs.empty()) {
    const StateSpec scan_state = state_from_text(o.scan_state, 2);
    std::vector<ConvergenceRow> rows;
    try {
      rows = convergence_scan(square, scan_state, o.scan_cutoffs);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--scan-cutoffs: ") + e.what());
    }
    json table = json::array();
    std::string csv = "cutoff,chi,deviation,tail_mass\n";
    for (const auto& r : rows) {
      table.push_back({{"cutoff", r.cutoff},
                       {"chi", r.chi},
                       {"deviation", r.deviation},
                       {"tail_mass", r.tail_mass},
                       {"truncation_warning", r.truncation_warning}});
      csv += csv_line({double(r.cutoff), r.chi, r.deviation, r.tail_mass});
    }
    rep.result["scan"] = {{"state", to_json(scan_state)}, {"rows", table}};
    rep.csv = csv;
  }
  return rep;
}

// ------------------------------------------------------------------ bound

struct BoundOptions {
  double lambda = 2.0;
  int restarts = 64;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 2024;
  std::int64_t check_derivatives = 0;
};

Report cmd_bound(const BoundOptions& o) {
  if (o.restarts < 1) throw ConfigError("--restarts must be >= 1");
  if (o.samples < 0) throw ConfigError("--samples must be >= 0");
  if (o.check_derivatives < 0) throw ConfigError("--check-derivatives must be >= 0");
  if (!(o.lambda >= 2.0))
    throw ConfigError("--lambda must be >= 2: the classical bound 3*sqrt(3) is only established for lambda >= 2");
  const double bound = classical_bound();
  Report rep;
  const VertexMax pm = vertex_max_F_real();
  const VertexMax cube = vertex_max_F();
  const OptimumResult con = constrained_max(o.restarts, o.seed);
  const PunishedMax pun = punished_max(o.lambda, o.samples, o.restarts, o.seed);
  const double slack = 1e-9;
  rep.result = {{"bound", bound},
                {"lambda", o.lambda},
                {"pm_vertex", pm.value},
                {"imag_vertex", vertex_max_F_imag().value},
                {"cube_vertex", cube.value},
                {"constrained", {{"value", con.value}, {"restarts", con.restarts}}},
                {"punished",
                 {{"value", pun.value},
                  {"optimiser", pun.optimiser.value},
                  {"sampling", pun.sampling.value},
                  {"samples", pun.sampling.samples},
                  {"restarts", pun.optimiser.restarts}}},
                {"seed", o.seed}};
  rep.pass = pm.value == 4.0 && cube.value == 12.0 && con.value <= bound + slack && pun.value <= bound + slack;
  if (o.check_derivatives > 0) {
    const DirectionalSweep sw = directional_sweep(o.lambda, o.check_derivatives, o.seed);
    rep.result["derivatives"] = {{"points", sw.points}, {"max", sw.max_derivative}, {"all_non_positive", sw.max_derivative <= 1e-12}};
    rep.pass = rep.pass && sw.max_derivative <= 1e-12;
  }
  return rep;
}

// --------------------------------------------------------------- discrete

struct DiscreteOptions {
  int d = 2;
  bool brute_force = false;
};

json label_json(const HWLabel& l) { return json::array({l.l, l.m}); }

bool matches(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff() == 0.0; }

Report cmd_discrete(const DiscreteOptions& o) {
  TripleSearch search;
  try {
    search = find_triples(o.d);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const int d = o.d;
  Report rep;
  rep.result["d"] = d;
  rep.result["congruent_triples"] = search.congruent.size();
  rep.result["exact_triples"] = search.exact.size();
  if (o.brute_force) {
    const TripleSearch ref = find_triples_bruteforce(d);
    const bool same = ref.congruent == search.congruent && ref.exact == search.exact;
    rep.result["brute_force_agrees"] = same;
    rep.pass = rep.pass && same;
  }
  const HWTriple canonical{HWLabel::make(1, 0, d), HWLabel::make(0, d / 2, d), HWLabel::make(-1, -d / 2, d)};
  rep.result["triple"] = json::array({label_json(canonical[0]), label_json(canonical[1]), label_json(canonical[2])});
  const DiscreteSquareCheck c = check_discrete_square(build_discrete_square(canonical, d));
  rep.result["square"] = {{"max_commutator", c.max_commutator},
                          {"max_product_error", c.max_product_error},
                          {"identity_error", c.identity_error},
                          {"chi", c.mixed_state_chi},
                          {"pass", c.pass}};
  rep.pass = rep.pass && c.pass;
  if (d == 2) {
    Eigen::MatrixXcd sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, std::complex<double>(0, -1), std::complex<double>(0, 1), 0;
    sz << 1, 0, 0, -1;
    const bool z = matches(word_matrix(hw_word(1, 0, 2)), sz);
    const bool x = matches(word_matrix(hw_word(0, 1, 2)), sx);
    const bool y = matches(word_matrix(hw_word(1, 1, 2)), sy);
    rep.result["pauli"] = {{"sigma_z", z}, {"sigma_x", x}, {"sigma_y", y}};
    rep.pass = rep.pass && z && x && y;
  }
  return rep;
}

// ------------------------------------------------------------ single-mode

struct SingleModeOptions {
  double max_amplitude = 10.0;
  int obstruction_k = 30;
};

Report cmd_single_mode(const SingleModeOptions& o) {
  if (o.obstruction_k < 0) throw ConfigError("--obstruction-K must be >= 0");
  SingleModeLayout lay;
  try {
    lay = approx_single_mode(o.max_amplitude);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  Report rep;
  double worst = 0.0;
  for (double dv : lay.deviations) worst = std::max(worst, std::abs(dv));
  const ValidationReport val = validate_square(to_square(lay));
  double phase_worst = 0.0;
  for (const auto& l : val.lines) phase_worst = std::max(phase_worst, l.phase_residual);
  rep.result["layout"] = {{"max_amplitude", o.max_amplitude},
                          {"s", lay.s},
                          {"r", lay.r},
                          {"ell", lay.ell},
                          {"length", lay.max_length()},
                          {"k_values", lay.k_values},
                          {"k_ideal", lay.k_ideal},
                          {"deviations", lay.deviations},
                          {"max_deviation", worst},
                          {"max_phase_residual", phase_worst},
                          {"target_signs", lay.target_signs}};
  if (o.obstruction_k > 0) {
    const ObstructionReport ob = obstruction_search(o.obstruction_k);
    std::int64_t tt = 0;
    for (const auto& p : ob.three_three) tt += p.solutions;
    rep.result["obstruction"] = {{"K", ob.K},
                                 {"square_pattern_solutions", ob.square_pattern.solutions},
                                 {"square_pattern_tuples", ob.square_pattern.tuples},
                                 {"three_three_patterns", ob.three_three.size()},
                                 {"three_three_solutions", tt},
                                 {"all_even_solutions", ob.all_even.solutions},
                                 {"no_solution", ob.no_solution()}};
    rep.pass = ob.no_solution();
  }
  return rep;
}

// ----------------------------------------------------------------- ramsey

struct RamseyOptions {
  bool c3 = false;
  double alpha = 1.34;
  int cutoff = 32;
  std::string state;
  std::string sequence;
  std::string drive;
  double lambda0 = 0.2;
  double omega = 1.0;
  double delta = 0.1;
  double tau = 30.0;
  int steps = 20000;
  int fock_cutoff = 64;
  bool trace = false;
  int trace_points = 201;
  std::int64_t shots = 0;
  std::uint64_t seed = 2024;
};

FockState ramsey_state(const std::string& text, int cutoff) {
  if (cutoff < 2) throw ConfigError("--cutoff must be >= 2");
  try {
    return materialize(state_from_text(text, 2), {cutoff, cutoff});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Report ramsey_c3(const RamseyOptions& o) {
  const FockState state = ramsey_state(o.state, o.cutoff);
  const C3Result c3 = c3_protocol(o.alpha, state);
  std::array<LabeledDisplacement, 3> column;
  const auto steps = c3_steps(o.alpha, 0, 0, 0);
  double completeness = 0.0;
  double factorization = 0.0;
  const double a = o.alpha;
  for (int i = 0; i < 3; ++i) {
    column[i] = step_displacement(steps[i]);
    completeness = std::max(completeness, step_completeness_residual(steps[i], state.cutoffs(), state.components()));
    const PhaseVec per_mode = PhaseVec::polar(a, 2.0 * pi * i / 3.0);
    const FockOperator product = displacement_operator(LabeledDisplacement::single(kModeA, per_mode), state.cutoffs()) *
                                 displacement_operator(LabeledDisplacement::single(kModeB, per_mode), state.cutoffs());
    const Eigen::MatrixXcd diff = displacement_operator(column[i], state.cutoffs()).apply(state.components()) -
                                  product.apply(state.components());
    factorization = std::max(factorization, diff.cwiseAbs().maxCoeff());
  }
  const double fock = line_expectation(column, state);
  Report rep;
  rep.result = {{"mode", "c3"},
                {"alpha", o.alpha},
                {"cutoff", o.cutoff},
                {"correlations", c3.correlations},
                {"c3", c3.value},
                {"fock_c3", fock},
                {"residual", std::abs(c3.value - fock)},
                {"kraus_completeness", completeness},
                {"factorization_residual", factorization},
                {"tail_mass", state.tail_mass()}};
  rep.pass = std::abs(c3.value - fock) <= 1e-6 && completeness <= 1e-12 && factorization <= 1e-8;
  return rep;
}

Report ramsey_sequence(const RamseyOptions& o) {
  SequenceConfig cfg;
  try {
    cfg = parse_sequence_config(read_json_file(o.sequence));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  FockState state = [&] {
    try {
      return materialize(cfg.state, {cfg.cutoff, cfg.cutoff});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  Report rep;
  json steps = json::array();
  double completeness = 0.0;
  for (const auto& s : cfg.steps) {
    steps.push_back({{"phi", s.phi}, {"alpha", vec(s.alpha_target)}, {"theta_mix", s.theta_mix}});
    completeness = std::max(completeness, step_completeness_residual(s, state.cutoffs(), state.components()));
  }
  rep.result["mode"] = "sequence";
  rep.result["steps"] = steps;
  rep.result["cutoff"] = cfg.cutoff;
  rep.result["kraus_completeness"] = completeness;
  try {
    const SequenceResult r = sequence_correlation(state, {cfg.steps[0], cfg.steps[1], cfg.steps[2]});
    double total = 0.0;
    for (double p : r.branch_probabilities) total += p;
    rep.result["correlation"] = r.correlation;
    rep.result["trace_value"] = r.trace_value;
    rep.result["trace_imag"] = r.trace_imag;
    rep.result["residual"] = r.residual();
    rep.result["branch_probabilities"] = r.branch_probabilities;
    rep.result["probability_sum"] = total;
    rep.result["tail_mass"] = r.tail_mass;
    rep.result["truncation_warning"] = r.truncation_warning;
    rep.pass = r.residual() <= 1e-8 && completeness <= 1e-12 && std::abs(total - 1.0) <= 1e-12;
    if (o.shots > 0) {
      const SampledCorrelation s =
          sample_correlation({r.branch_probabilities.begin(), r.branch_probabilities.end()}, o.shots, o.seed);
      rep.result["sampled"] = {{"mean", s.mean}, {"standard_error", s.standard_error}, {"shots", s.shots}, {"seed", o.seed}};
    }
  } catch (const NonCommutingSteps& e) {
    rep.result["error"] = e.what();
    rep.result["non_commuting"] = {{"steps", {e.first(), e.second()}}, {"commutation_phase", e.phase()}};
    rep.pass = false;
  }
  return rep;
}

Report ramsey_drive(const RamseyOptions& o) {
  DriveProfile drive;
  try {
    drive = DriveProfile::make(parse_drive_kind(o.drive), o.lambda0, o.omega, o.delta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(o.tau >= 0.0)) throw ConfigError("--tau must be >= 0");
  if (o.steps < 100) throw ConfigError("--steps must be >= 100");
  Report rep;
  auto amp_json = [](const ForcedAmplitude& f) {
    return json{{"alpha", vec(f.alpha)}, {"alpha_tilde", vec(f.alpha_tilde)}, {"phi", f.phi}, {"limit", f.limit}};
  };
  rep.result["mode"] = "drive";
  rep.result["drive"] = {{"kind", to_string(drive.kind)}, {"lambda0", drive.lambda0}, {"omega", drive.omega}, {"delta", drive.delta}};
  if (o.trace) {
    if (o.trace_points < 2) throw ConfigError("--trace-points must be >= 2");
    const auto rows = drive_trace(drive, o.tau, o.trace_points);
    json table = json::array();
    for (const auto& r : rows) table.push_back({{"tau", r.tau}, {"amplitude", amp_json(r.amplitude)}});
    rep.result["trace"] = table;
    rep.csv = trace_csv(rows);
    return rep;
  }
  const ForcedAmplitude closed = forced_amplitude(drive, o.tau);
  const ForcedAmplitude numeric = integrate_drive(drive, o.tau, o.steps);
  const double err = relative_error(closed, numeric);
  rep.result["tau"] = o.tau;
  rep.result["closed_form"] = amp_json(closed);
  rep.result["integrated"] = amp_json(numeric);
  rep.result["relative_error"] = err;
  rep.pass = err <= 1e-6;
  if (o.fock_cutoff > 0) {
    if (o.fock_cutoff < 2) throw ConfigError("--fock-cutoff must be >= 2 (0 skips the Fock route)");
    // the Fock route sees the phase only mod 2 pi and loses accuracy near the cutoff
    const ForcedAmplitude fock = fock_drive_evolution(drive, o.tau, o.steps, o.fock_cutoff);
    const double da = std::abs(fock.alpha_tilde.complex() - closed.alpha_tilde.complex());
    const double dphi = phase_distance(fock.phi, closed.phi);
    rep.result["fock"] = {{"cutoff", o.fock_cutoff},
                          {"alpha_tilde", vec(fock.alpha_tilde)},
                          {"phase_mod_2pi", fock.phi},
                          {"alpha_difference", da},
                          {"phase_difference", dphi}};
    rep.pass = rep.pass && da <= 1e-6 * std::max(1.0, closed.alpha_tilde.norm()) && dphi <= 1e-6;
  }
  return rep;
}

Report cmd_ramsey(const RamseyOptions& o) {
  const int modes = (o.c3 ? 1 : 0) + (!o.sequence.empty() ? 1 : 0) + (!o.drive.empty() ? 1 : 0);
  if (modes > 1) throw ConfigError("choose one of --c3, --sequence, --drive");
  if (!o.sequence.empty()) return ramsey_sequence(o);
  if (!o.drive.empty()) return ramsey_drive(o);
  return ramsey_c3(o);
}

// ------------------------------------------------------------------- main

int run(int argc, char** argv) {
  apply_thread_env();
  std::vector<std::string> args(argv, argv + argc);
  args = expand_config(std::move(args));

  CLI::App app{"Phase-space Peres-Mermin toolkit: squares, classical bounds, Fock-space and Ramsey simulation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  bool no_timestamp = false;
  std::string format = "json";
  std::string output;
  app.add_option("--threads", threads, "OpenMP threads (default: PHASECTX_THREADS or runtime default)");
  app.add_flag("--no-timestamp", no_timestamp, "Omit the generated_at field");
  auto* format_opt =
      app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", output, "Write to this file instead of stdout");

  PmCvOptions pm;
  auto* pm_cmd = app.add_subcommand("pm-cv", "Two-mode square: symbolic validation and <chi_PM> in truncated Fock space");
  pm_cmd->add_option("--triple", pm.triple, "Custom amplitudes 're,im;re,im;re,im'");
  pm_cmd->add_option("--start-angle", pm.start_angle, "Rotation of the symmetric triple");
  pm_cmd->add_option("--cutoff", pm.cutoff, "Per-mode Fock cutoff");
  pm_cmd->add_option("--random-states", pm.random_states, "Number of seeded random states");
  pm_cmd->add_option("--support", pm.support, "Fock support of the random states");
  pm_cmd->add_option("--seed", pm.seed, "Seed of the first random state");
  pm_cmd->add_option("--state", pm.state, "Extra state as JSON");
  pm_cmd->add_option("--scan-cutoffs", pm.scan_cutoffs, "Convergence scan cutoffs")->delimiter(',');
  pm_cmd->add_option("--scan-state", pm.scan_state, "State for the scan as JSON (default vacuum)");
  pm_cmd->add_option("--tolerance", pm.tolerance, "Allowed |chi - 6|");

  BoundOptions bd;
  auto* bound_cmd = app.add_subcommand("bound", "Classical maxima of the PM expression");
  bound_cmd->add_option("--lambda", bd.lambda, "Punishment weight (>= 2)");
  bound_cmd->add_option("--restarts", bd.restarts, "Optimiser restarts");
  bound_cmd->add_option("--samples", bd.samples, "Random cube samples");
  bound_cmd->add_option("--seed", bd.seed, "Seed");
  bound_cmd->add_option("--check-derivatives", bd.check_derivatives, "Points for the radial derivative check");

  DiscreteOptions dc;
  auto* discrete_cmd = app.add_subcommand("discrete", "Heisenberg-Weyl squares in dimension d");
  discrete_cmd->add_option("--d", dc.d, "Dimension (even)");
  discrete_cmd->add_flag("--brute-force", dc.brute_force, "Cross-check the triple search by full enumeration");

  SingleModeOptions sm;
  auto* single_cmd = app.add_subcommand("single-mode", "Single-mode obstruction and large-displacement approximation");
  single_cmd->add_option("--max-amplitude", sm.max_amplitude, "Displacement budget");
  single_cmd->add_option("--obstruction-K", sm.obstruction_k, "Search range [-K, K]; 0 skips the search");

  RamseyOptions rs;
  auto* ramsey_cmd = app.add_subcommand("ramsey", "Ramsey measurement sequences and driven displacements");
  ramsey_cmd->add_flag("--c3", rs.c3, "Third-column correlation protocol (default mode)");
  ramsey_cmd->add_option("--alpha", rs.alpha, "Per-mode amplitude of the protocol");
  ramsey_cmd->add_option("--cutoff", rs.cutoff, "Per-mode Fock cutoff");
  ramsey_cmd->add_option("--state", rs.state, "State as JSON (default vacuum)");
  ramsey_cmd->add_option("--sequence", rs.sequence, "Sequence config file");
  ramsey_cmd->add_option("--drive", rs.drive, "complex-exponential | real-cosine");
  ramsey_cmd->add_option("--lambda0", rs.lambda0, "Drive amplitude");
  ramsey_cmd->add_option("--omega", rs.omega, "Oscillator frequency");
  ramsey_cmd->add_option("--delta", rs.delta, "Detuning");
  ramsey_cmd->add_option("--tau", rs.tau, "Drive duration (trace end time with --trace)");
  ramsey_cmd->add_option("--steps", rs.steps, "RK4 steps of the reference integration");
  ramsey_cmd->add_option("--fock-cutoff", rs.fock_cutoff, "Cutoff of the Fock-space drive route; 0 skips it");
  ramsey_cmd->add_flag("--trace", rs.trace, "Emit alpha(tau), alpha~(tau), phi(tau) over [0, tau]");
  ramsey_cmd->add_option("--trace-points", rs.trace_points, "Rows of the trace");
  ramsey_cmd->add_option("--shots", rs.shots, "Finite-shot estimate of a sequence");
  ramsey_cmd->add_option("--seed", rs.seed, "Seed of the finite-shot estimate");

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (threads < 0) throw ConfigError("--threads must be >= 0");
  if (threads > 0) set_thread_count(threads);

  Report rep;
  std::string command;
  if (*pm_cmd) {
    command = "pm-cv";
    rep = cmd_pm_cv(pm);
  } else if (*bound_cmd) {
    command = "bound";
    rep = cmd_bound(bd);
  } else if (*discrete_cmd) {
    command = "discrete";
    rep = cmd_discrete(dc);
  } else if (*single_cmd) {
    command = "single-mode";
    rep = cmd_single_mode(sm);
  } else {
    command = "ramsey";
    rep = cmd_ramsey(rs);
  }

  // a trace is tabular by nature: CSV unless JSON was asked for explicitly
  const bool want_csv = format == "csv" || (rs.trace && format_opt->count() == 0 && command == "ramsey");
  std::string text;
  if (want_csv) {
    if (!rep.csv) throw ConfigError("--format csv needs tabular data (pm-cv --scan-cutoffs or ramsey --trace)");
    text = *rep.csv;
  } else {
    json doc = {{"command", command}, {"version", kVersion}, {"pass", rep.pass}, {"result", rep.result}};
    if (!no_timestamp) doc["generated_at"] = timestamp_utc();
    text = rounded(doc).dump(2) + "\n";
  }
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output);
    if (!out) throw ConfigError("cannot write " + output);
    out << text;
  }
  return rep.pass ? kExitPass : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "phasectx: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "phasectx: " << e.what() << "\n";
    return kExitFailure;
  }
}
