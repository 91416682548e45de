#pragma once

// Named experiments: resolve a process, potential and theorem from
// key=value settings, run the requested action and write CSV.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "drift/drift.hpp"

namespace drift {

inline constexpr const char* kToolkitVersion = "0.1.0";

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentSpec {
  std::string action;
  std::string process;
  std::string fitness = "onemax";
  std::string potential = "fitness";
  std::string theorem;
  std::string tolerance = "ci3";
  std::map<std::string, std::string> params;
  std::optional<std::uint64_t> seed;
  std::size_t trials = 1000;
  std::uint64_t max_steps = kDefaultMaxSteps;
  unsigned workers = 1;
  std::string out;
  std::string suite;

  bool has(const std::string& k) const { return params.count(k) > 0; }

  double num(const std::string& k) const {
    auto it = params.find(k);
    if (it == params.end()) throw UsageError("missing parameter '" + k + "'");
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(k);
      return v;
    } catch (const std::exception&) {
      throw UsageError("parameter '" + k + "' is not a number: '" +
                       it->second + "'");
    }
  }

  double num(const std::string& k, double fallback) const {
    return has(k) ? num(k) : fallback;
  }

  std::size_t count(const std::string& k) const {
    const double v = num(k);
    if (v < 0 || v != std::floor(v) || v > 9e15)
      throw UsageError("parameter '" + k + "' must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  std::size_t count(const std::string& k, std::size_t fallback) const {
    return has(k) ? count(k) : fallback;
  }

  std::string str(const std::string& k, const std::string& fallback) const {
    auto it = params.find(k);
    return it == params.end() ? fallback : it->second;
  }

  /// Everything that affects results; worker count and output path excluded.
  std::string canonical() const {
    std::ostringstream s;
    s << "action=" << action << "\nprocess=" << process
      << "\nfitness=" << fitness << "\npotential=" << potential
      << "\ntheorem=" << theorem << "\ntolerance=" << tolerance
      << "\ntrials=" << trials << "\nmax_steps=" << max_steps
      << "\nseed=" << (seed ? std::to_string(*seed) : "none");
    for (const auto& [k, v] : params) s << '\n' << k << '=' << v;
    return s.str();
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::string params_text() const {
    std::string s;
    for (const auto& [k, v] : params) {
      if (!s.empty()) s += ';';
      s += k + "=" + v;
    }
    return s;
  }
};

namespace detail {

inline std::uint64_t parse_u64(const std::string& v, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(what);
    return x;
  } catch (const std::exception&) {
    throw UsageError(what + " must be a nonnegative integer, got '" + v + "'");
  }
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Routes a key=value setting to a spec field or to the parameter map.
inline void apply_setting(ExperimentSpec& s, const std::string& key,
                          const std::string& value) {
  if (key == "action") s.action = value;
  else if (key == "process") s.process = value;
  else if (key == "fitness") s.fitness = value;
  else if (key == "potential") s.potential = value;
  else if (key == "theorem") s.theorem = value;
  else if (key == "tolerance") s.tolerance = value;
  else if (key == "seed") s.seed = detail::parse_u64(value, "seed");
  else if (key == "trials") s.trials = detail::parse_u64(value, "trials");
  else if (key == "max_steps" || key == "max-steps")
    s.max_steps = detail::parse_u64(value, "max_steps");
  else if (key == "workers")
    s.workers = static_cast<unsigned>(detail::parse_u64(value, "workers"));
  else if (key == "out") s.out = value;
  else s.params[key] = value;
}

inline void apply_setting(ExperimentSpec& s, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("expected key=value, got '" + kv + "'");
  apply_setting(s, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
}

/// `key = value` lines grouped by [experiment], [process], [potential],
/// [theorem] and [verify] headers.
inline ExperimentSpec parse_spec(std::istream& in, const std::string& origin) {
  ExperimentSpec s;
  std::string line, section = "experiment";
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw UsageError(origin + ":" + std::to_string(lineno) + ": bad section");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(lineno) +
                       ": expected 'key = value'");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (section == "process" && key == "name") s.process = value;
    else if (section == "potential" && key == "name") s.potential = value;
    else if (section == "theorem" && key == "id") s.theorem = value;
    else if (section == "experiment" || section == "process" ||
             section == "potential" || section == "theorem" ||
             section == "verify")
      apply_setting(s, key, value);
    else
      throw UsageError(origin + ": unknown section [" + section + "]");
  }
  return s;
}

inline ExperimentSpec read_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open spec file '" + path + "'");
  return parse_spec(in, path);
}

namespace detail {

inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void header(std::ostream& out, const ExperimentSpec& s) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# drift-toolkit %s, spec_hash=%016llx, seed=",
                kToolkitVersion, static_cast<unsigned long long>(s.hash()));
  out << buf << (s.seed ? std::to_string(*s.seed) : "none") << '\n';
}

inline Direction parse_direction(const std::string& v) {
  if (v == "max" || v == "maximize") return Direction::maximize;
  if (v == "min" || v == "minimize") return Direction::minimize;
  throw UsageError("direction must be max or min, got '" + v + "'");
}

inline EAConfig ea_config(const ExperimentSpec& s, Direction default_dir) {
  EAConfig cfg;
  cfg.n = s.count("n");
  cfg.lambda = s.count("lambda", 1);
  cfg.mutation_c = s.num("c", 1.0);
  cfg.tau = s.count("tau", 1);
  cfg.direction = s.has("direction") ? parse_direction(s.str("direction", ""))
                                     : default_dir;
  if (s.has("init")) cfg.init_ones = s.count("init");
  return cfg;
}

inline constexpr std::size_t kChainDeclineCap = 2000;

}  // namespace detail

/// What a process resolves to: the process object, its chain when it is an
/// explicit chain, and the potential level that counts as the target.
template <class P>
struct ProcessContext {
  const P& process;
  const ExplicitChain* chain;
  double target_level;
};

/// Builds the named process and calls fn(ProcessContext<P>).
template <class Fn>
decltype(auto) with_process(const ExperimentSpec& s, Fn&& fn) {
  const auto& name = s.process;
  if (name.empty()) throw UsageError("no process given");
  if (name == "rls" || name == "oplea" || name == "island") {
    const Fitness f = parse_fitness(s.fitness);
    if (name == "rls") {
      RlsProcess p(f, detail::ea_config(s, Direction::maximize));
      return fn(ProcessContext<RlsProcess>{p, nullptr, 0.0});
    }
    if (name == "oplea") {
      OnePlusLambdaProcess p(f, detail::ea_config(s, Direction::minimize));
      return fn(ProcessContext<OnePlusLambdaProcess>{p, nullptr, 0.0});
    }
    IslandProcess p(f, detail::ea_config(s, Direction::minimize));
    return fn(ProcessContext<IslandProcess>{p, nullptr, 0.0});
  }
  if (name == "shortcut-rls") {
    std::optional<std::size_t> init;
    if (s.has("init")) init = s.count("init");
    ShortcutRlsProcess p(s.count("n"), init);
    return fn(ProcessContext<ShortcutRlsProcess>{p, nullptr, 0.0});
  }
  if (name == "negdrift-walk") {
    const double b = s.num("b", 0.75);
    NegativeDriftWalk p(s.count("n"), s.num("pup", 0.75), s.num("a", 0.25), b,
                        s.num("sf", b));
    return fn(ProcessContext<NegativeDriftWalk>{p, nullptr, p.target_level()});
  }
  if (name == "random-decline" && s.count("N", 100 * s.count("n")) >
                                      detail::kChainDeclineCap) {
    RandomDeclineProcess p(s.num("a"), s.count("n"),
                           s.count("N", 100 * s.count("n")));
    return fn(ProcessContext<RandomDeclineProcess>{p, nullptr, 0.0});
  }
  ExplicitChain chain;
  if (name == "coupon") {
    chain = coupon_collector_chain(s.count("n"));
  } else if (name == "gamblers-ruin") {
    chain = gamblers_ruin(s.num("bias", 0.0), s.count("start", 1),
                          s.count("N", 200));
  } else if (name == "weak-drift") {
    const auto n = s.count("n");
    chain = weak_drift_walk(n, s.count("N", 40 * n));
  } else if (name == "random-decline") {
    chain = random_decline_chain(s.num("a"), s.count("n"),
                                 s.count("N", 100 * s.count("n")));
  } else if (name == "chain") {
    std::ifstream in(s.str("file", ""));
    if (!in) throw UsageError("process 'chain' needs file=<chain file>");
    chain = read_chain(in);
    if (s.has("start")) {
      const auto idx = chain.index_of(s.num("start"));
      if (!idx) throw UsageError("start value is not a chain state");
      chain.start = *idx;
    }
  } else {
    throw UsageError("unknown process '" + name + "'");
  }
  ChainProcess p(chain, chain.start, name);
  return fn(ProcessContext<ChainProcess>{p, &p.chain(), 0.0});
}

namespace detail {

template <class S>
concept HasBits = requires(const S& s) { bits_of(s); };

inline double default_smax(const ExperimentSpec& s) {
  if (s.has("smax")) return s.num("smax");
  if (s.has("N")) return s.num("N");
  if (s.has("n")) return s.num("n");
  return 1.0;
}

}  // namespace detail

/// fitness | translated | log | rescaled:<h-spec> | djw | onemax | canonical
template <class P>
Potential<typename P::State> make_potential(const ExperimentSpec& s,
                                            const ProcessContext<P>& ctx) {
  using State = typename P::State;
  const P* proc = &ctx.process;
  Potential<State> native{
      [proc](const State& st) { return static_cast<double>(proc->potential(st)); },
      "fitness"};
  const auto& name = s.potential;
  if (name == "fitness" || name == "native") return native;
  if (name == "translated") return translated_potential(std::move(native));
  if (name == "log") return log_potential(std::move(native));
  if (name.rfind("rescaled:", 0) == 0)
    return rescale_potential(std::move(native), parse_h(name.substr(9)),
                             s.num("smin", 1.0), detail::default_smax(s));
  if (name == "djw" || name == "onemax") {
    if constexpr (detail::HasBits<State>) {
      if (name == "onemax") return onemax_potential<State>();
      return djw_potential<State>(s.count("n"));
    } else {
      throw UsageError("potential '" + name + "' needs a bit-string process");
    }
  }
  if (name == "canonical") {
    if constexpr (std::is_same_v<State, std::size_t>) {
      if (!ctx.chain) throw UsageError("canonical potential needs a chain");
      return canonical_potential_exact(*ctx.chain);
    } else {
      throw UsageError("canonical potential needs an explicit chain process");
    }
  }
  throw UsageError("unknown potential '" + name + "'");
}

/// The potential as a map on values, for bound calculators.
inline std::function<double(double)> value_transform(const ExperimentSpec& s) {
  const auto& name = s.potential;
  if (name == "fitness" || name == "native") return [](double x) { return x; };
  if (name == "translated") return translate_value;
  if (name == "log") return log_value;
  if (name.rfind("rescaled:", 0) == 0) {
    auto g = std::make_shared<Rescaling>(parse_h(name.substr(9)),
                                         s.num("smin", 1.0), detail::default_smax(s));
    return [g](double x) { return (*g)(x); };
  }
  throw UsageError("potential '" + name + "' has no value form");
}

/// Drift constants known in closed form for common setups.
inline std::optional<double> known_delta(const ExperimentSpec& s) {
  const auto& p = s.process;
  const bool plain = s.potential == "fitness" || s.potential == "native";
  if (p == "rls" && s.fitness == "leadingones" && s.potential == "translated")
    return 2.0 / s.num("n");
  if (p == "rls" && s.fitness == "leadingones" && plain)
    return (s.theorem == "T1b" ? 2.0 : 1.0) / s.num("n");
  if ((p == "rls" && (s.fitness == "onemax" || s.fitness == "binval")) ||
      p == "coupon")
    return plain ? std::optional<double>(1.0 / s.num("n")) : std::nullopt;
  if (p == "oplea" && s.fitness == "onemax" && s.num("lambda", 1) == 1 && plain) {
    const double n = s.num("n"), c = s.num("c", 1.0);
    return c / n * std::pow(1.0 - c / n, n - 1.0);
  }
  if (p == "shortcut-rls" && plain) {
    const double n = s.num("n");
    return 2.0 / n - 1.0 / (n * n);
  }
  if (p == "gamblers-ruin" && plain) return 2.0 * s.num("bias", 0.0);
  if (p == "weak-drift" && plain) return std::pow(s.num("n"), -4.0);
  return std::nullopt;
}

namespace detail {

inline InitialCondition x0_from_param(const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return InitialCondition::fixed(x);
  } catch (const std::exception&) {
  }
  std::vector<double> vals;
  for (const auto& line : data_lines(v)) vals.push_back(parse_double(line, "x0"));
  return InitialCondition::samples(std::move(vals));
}

inline double delta_of(const ExperimentSpec& s) {
  if (s.has("delta")) return s.num("delta");
  if (auto d = known_delta(s)) return *d;
  throw UsageError("theorem needs delta=<value>");
}

inline DriftFunctionH h_of(const ExperimentSpec& s) {
  if (s.has("h")) return parse_h(s.str("h", ""));
  const bool plain = s.potential == "fitness" || s.potential == "native";
  if (s.theorem == "T5" && s.process == "rls" && s.fitness == "onemax" && plain) {
    // Upper bound on the drift, as the lower-bound theorem requires.
    const double n = s.num("n");
    auto h = h_affine(1.0 / n, 1.0 / n);
    h.label = "(s+1)/n";
    return h;
  }
  auto h = h_linear(delta_of(s));
  h.label = "mul:" + fmt(delta_of(s));
  return h;
}

inline TailDirection tail_of(const ExperimentSpec& s, TheoremId id) {
  if (id == TheoremId::T8_lower || id == TheoremId::T9_lower)
    return TailDirection::lower;
  if (id == TheoremId::T8_upper || id == TheoremId::T9_upper)
    return TailDirection::upper;
  return s.str("tail", "upper") == "lower" ? TailDirection::lower
                                           : TailDirection::upper;
}

}  // namespace detail

/// Evaluates the theorem named in the spec for the given X_0 description.
/// beta_estimate feeds T9 when no beta parameter is set.
inline BoundResult compute_bound(const ExperimentSpec& s,
                                 const InitialCondition& x0,
                                 std::optional<double> beta_estimate = {}) {
  if (s.theorem.empty()) throw UsageError("no theorem given");
  const TheoremId id = parse_theorem(s.theorem);
  const double smin = s.num("smin", 1.0);
  switch (id) {
    case TheoremId::T1a: return additive_upper_bound(x0, detail::delta_of(s));
    case TheoremId::T1b: return additive_lower_bound(x0, detail::delta_of(s));
    case TheoremId::T2: return variable_upper_bound(detail::h_of(s), smin, x0);
    case TheoremId::T3:
      return multiplicative_upper_bound(detail::delta_of(s), smin, x0);
    case TheoremId::T4:
      return variable_lower_bound_factor(detail::h_of(s), s.num("c", 1.0), smin, x0);
    case TheoremId::T5: return variable_lower_bound_xi(detail::h_of(s), smin, x0);
    case TheoremId::T6:
      return multiplicative_lower_bound(detail::delta_of(s), s.num("beta"), smin, x0);
    case TheoremId::T7:
      return multiplicative_tail_upper(detail::delta_of(s), x0.max(), smin,
                                       s.num("r"));
    case TheoremId::T8_lower:
    case TheoremId::T8_upper:
      return additive_tail_bound(detail::delta_of(s), s.num("eta"),
                                 s.num("jump_r", 1.0), x0.max(), s.num("x"),
                                 detail::tail_of(s, id));
    case TheoremId::T9_upper:
    case TheoremId::T9_lower: {
      double beta = 0.0;
      if (s.has("beta")) beta = s.num("beta");
      else if (beta_estimate) beta = *beta_estimate;
      else throw UsageError("T9 needs beta=<value>");
      return general_drift_tail(value_transform(s), s.num("glambda"),
                                BetaSchedule::constant(beta), x0.max(),
                                s.num("a", 0.0), s.count("t"),
                                detail::tail_of(s, id));
    }
    case TheoremId::T10_check:
      throw UsageError("T10-check needs a drift table; use verify");
  }
  throw UsageError("unsupported theorem");
}

struct Tolerance {
  enum class Kind { ci3, rel, abs } kind = Kind::ci3;
  double value = 3.0;

  static Tolerance parse(const std::string& t) {
    if (t == "ci3") return {Kind::ci3, 3.0};
    if (t.rfind("rel:", 0) == 0)
      return {Kind::rel, detail::parse_double(t.substr(4), "tolerance")};
    if (t.rfind("abs:", 0) == 0)
      return {Kind::abs, detail::parse_double(t.substr(4), "tolerance")};
    throw UsageError("tolerance must be ci3, rel:<p> or abs:<v>");
  }

  double slack(double bound, double std_error) const {
    switch (kind) {
      case Kind::ci3: return 3.0 * std_error;
      case Kind::rel: return value * std::abs(bound);
      case Kind::abs: return value;
    }
    return 0.0;
  }
};

namespace detail {

struct TrialsWithStart {
  std::vector<TrialOutcome> outcomes;
  std::vector<double> x0;
};

template <StochasticProcess P>
TrialsWithStart run_with_start(const P& process,
                               const Potential<typename P::State>& pot,
                               const ExperimentSpec& s, double target) {
  TrialsWithStart r;
  r.outcomes.resize(s.trials);
  r.x0.resize(s.trials);
  const RunOptions run{s.max_steps, target};
  for_each_chunk(s.trials, s.workers,
                 [&](std::size_t, std::size_t lo, std::size_t hi) {
                   for (std::size_t i = lo; i < hi; ++i)
                     r.outcomes[i] = simulate_trial(
                         process, *s.seed, i, run,
                         [&](std::uint64_t t, const auto& st, double) {
                           if (t == 0) r.x0[i] = pot(st);
                         });
                 });
  return r;
}

inline void require_seed(const ExperimentSpec& s) {
  if (!s.seed) throw UsageError(s.action + " needs --seed");
  if (s.trials < 1) throw UsageError("trials must be >= 1");
}

}  // namespace detail

inline int run_simulate(const ExperimentSpec& s, std::ostream& out) {
  detail::require_seed(s);
  return with_process(s, [&](const auto& ctx) {
    const auto st = estimate_hitting_time(ctx.process, s.trials, s.max_steps,
                                          *s.seed, s.workers, ctx.target_level);
    detail::header(out, s);
    out << "process,params,trials,mean,var,ci99,median,truncated\n";
    out << detail::csv_field(ctx.process.descriptor()) << ','
        << detail::csv_field(s.params_text()) << ',' << st.trials << ','
        << detail::fmt(st.mean) << ',' << detail::fmt(st.variance) << ','
        << detail::fmt(st.ci99_halfwidth) << ',' << detail::fmt(st.median) << ','
        << st.truncated_count << '\n';
    return 0;
  });
}

inline void write_drift_table(std::ostream& out, const EmpiricalDriftTable& t) {
  out << "bucket_lo,bucket_hi,count,mean_delta,ci99,max_jump\n";
  for (const auto& [k, b] : t.buckets)
    out << detail::fmt(b.lo) << ',' << detail::fmt(b.hi) << ','
        << (b.exact ? std::string("inf") : std::to_string(b.count)) << ','
        << detail::fmt(b.mean) << ',' << detail::fmt(b.ci99()) << ','
        << detail::fmt(b.max_jump) << '\n';
}

template <class Ctx>
EmpiricalDriftTable drift_table_for(const ExperimentSpec& s, const Ctx& ctx) {
  const auto pot = make_potential(s, ctx);
  DriftOptions o;
  o.max_steps = s.max_steps;
  o.workers = s.workers;
  o.target_level = ctx.target_level;
  return estimate_drift(ctx.process, pot, s.trials, *s.seed, o);
}

inline int run_drift(const ExperimentSpec& s, std::ostream& out) {
  detail::require_seed(s);
  return with_process(s, [&](const auto& ctx) {
    const auto table = drift_table_for(s, ctx);
    detail::header(out, s);
    write_drift_table(out, table);
    return 0;
  });
}

inline int run_oracle(const ExperimentSpec& s, std::ostream& out) {
  return with_process(s, [&](const auto& ctx) {
    if (!ctx.chain)
      throw UsageError("oracle needs an explicit chain process");
    const auto sol = exact_hitting_times(*ctx.chain);
    const auto start = ctx.chain->start;
    detail::header(out, s);
    out << "process,params,start,expected_hitting,method,residual";
    if (s.has("t")) out << ",t,p_tail";
    out << '\n';
    out << detail::csv_field(ctx.process.descriptor()) << ','
        << detail::csv_field(s.params_text()) << ','
        << detail::fmt(ctx.chain->states[start]) << ','
        << detail::fmt(sol.expected_hitting[start]) << ','
        << to_string(sol.method) << ',' << detail::fmt(sol.residual);
    if (s.has("t")) {
      const auto t = s.count("t");
      out << ',' << t << ',' << detail::fmt(exact_tail(*ctx.chain, start, t));
    }
    out << '\n';
    return 0;
  });
}

inline void write_bound(std::ostream& out, const BoundResult& b) {
  out << "theorem_id,threshold,bound,assumption_flags\n";
  out << to_string(b.theorem) << ','
      << (b.threshold ? detail::fmt(*b.threshold) : std::string()) << ','
      << detail::fmt(b.bound) << ',' << detail::csv_field(b.flags()) << '\n';
}

inline int run_bound(const ExperimentSpec& s, std::ostream& out) {
  if (!s.has("x0")) throw UsageError("bound needs x0=<value|file>");
  const auto b = compute_bound(s, detail::x0_from_param(s.str("x0", "")));
  detail::header(out, s);
  write_bound(out, b);
  return 0;
}

struct VerifyOutcome {
  BoundResult bound;
  double estimate = 0.0;
  double std_error = 0.0;
  double slack = 0.0;
  bool pass = false;
  std::string relation;
};

template <class Ctx>
VerifyOutcome verify_with(const ExperimentSpec& s, const Ctx& ctx) {
  const TheoremId id = parse_theorem(s.theorem);
  const Tolerance tol = Tolerance::parse(s.tolerance);
  VerifyOutcome v;
  if (id == TheoremId::T10_check) {
    auto table = drift_table_for(s, ctx);
    const double n = s.num("n");
    v.bound = negative_drift_conditions_check(
        table, s.num("a", 0.25), s.num("b", 0.75), n, s.num("delta"),
        s.num("eta", 1.0), s.num("jump_r", 2.0));
    v.pass = v.bound.verdict.value_or(false);
    v.relation = "hypotheses";
    return v;
  }
  const auto pot = make_potential(s, ctx);
  const auto runs = detail::run_with_start(ctx.process, pot, s, ctx.target_level);
  const auto st = summarize(runs.outcomes);
  const InitialCondition x0 = s.has("x0")
                                  ? detail::x0_from_param(s.str("x0", ""))
                                  : InitialCondition::samples(runs.x0);
  std::optional<double> beta;
  if ((id == TheoremId::T9_upper || id == TheoremId::T9_lower) && !s.has("beta")) {
    DriftOptions o;
    o.max_steps = s.max_steps;
    o.workers = s.workers;
    o.target_level = ctx.target_level;
    beta = estimate_mgf_beta(ctx.process, pot, s.num("glambda"), s.trials,
                             *s.seed, o)
               .max_beta;
  }
  if (id == TheoremId::T9_upper || id == TheoremId::T9_lower) {
    // Start values are already potential values here.
    ExperimentSpec plain = s;
    plain.potential = "fitness";
    v.bound = compute_bound(plain, x0, beta);
  } else {
    v.bound = compute_bound(s, x0, beta);
  }
  if (!is_tail_bound(id)) {
    v.estimate = st.mean;
    v.std_error = st.std_error();
    v.slack = tol.slack(v.bound.bound, v.std_error);
    if (is_lower_bound(id)) {
      v.relation = ">=";
      v.pass = v.estimate >= v.bound.bound - v.slack;
    } else {
      v.relation = "<=";
      v.pass = v.estimate <= v.bound.bound + v.slack;
    }
    return v;
  }
  const double thr = *v.bound.threshold;
  double p = 0.0;
  switch (id) {
    case TheoremId::T7:
    case TheoremId::T9_upper:
      p = tail_from_stats(st, static_cast<std::uint64_t>(std::floor(thr))).p_hat;
      break;
    case TheoremId::T8_upper: {
      const double c = std::ceil(thr);
      p = c <= 0 ? 1.0 : tail_from_stats(st, static_cast<std::uint64_t>(c) - 1).p_hat;
      break;
    }
    case TheoremId::T8_lower:
      p = thr < 0 ? 0.0
                  : 1.0 - tail_from_stats(st, static_cast<std::uint64_t>(std::floor(thr))).p_hat;
      break;
    case TheoremId::T9_lower:
      p = thr <= 0 ? 0.0
                   : 1.0 - tail_from_stats(st, static_cast<std::uint64_t>(thr) - 1).p_hat;
      break;
    default: break;
  }
  v.estimate = p;
  v.std_error = std::sqrt(std::max(p * (1 - p), 1.0 / static_cast<double>(s.trials)) /
                          static_cast<double>(s.trials));
  v.slack = tol.slack(v.bound.bound, v.std_error);
  v.relation = "<=";
  v.pass = p <= v.bound.bound + v.slack;
  return v;
}

inline int run_verify(const ExperimentSpec& s, std::ostream& out) {
  detail::require_seed(s);
  if (s.theorem.empty()) throw UsageError("verify needs --theorem");
  return with_process(s, [&](const auto& ctx) {
    const auto v = verify_with(s, ctx);
    detail::header(out, s);
    out << "theorem_id,threshold,bound,estimate,std_error,relation,slack,"
           "verdict,assumption_flags\n";
    out << to_string(v.bound.theorem) << ','
        << (v.bound.threshold ? detail::fmt(*v.bound.threshold) : std::string())
        << ',' << detail::fmt(v.bound.bound) << ',' << detail::fmt(v.estimate)
        << ',' << detail::fmt(v.std_error) << ',' << v.relation << ','
        << detail::fmt(v.slack) << ',' << (v.pass ? "PASS" : "FAIL") << ','
        << detail::csv_field(v.bound.flags()) << '\n';
    return v.pass ? 0 : 2;
  });
}

int run_suite(const std::string& path, std::ostream& out, std::ostream& err,
              unsigned workers = 0);

/// Dispatches the spec's action. Returns 0 on success or PASS, 2 on FAIL
/// and 1 on usage errors (message written to err).
inline int run_experiment(const ExperimentSpec& s, std::ostream& out,
                          std::ostream& err) {
  try {
    std::ofstream file;
    std::ostream* sink = &out;
    if (!s.out.empty()) {
      file.open(s.out);
      if (!file) throw UsageError("cannot write '" + s.out + "'");
      sink = &file;
    }
    if (s.action == "simulate") return run_simulate(s, *sink);
    if (s.action == "drift") return run_drift(s, *sink);
    if (s.action == "oracle") return run_oracle(s, *sink);
    if (s.action == "bound") return run_bound(s, *sink);
    if (s.action == "verify") return run_verify(s, *sink);
    if (s.action == "suite") return run_suite(s.suite, *sink, err, s.workers);
    throw UsageError("unknown action '" + s.action + "'");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

/// Runs every spec file listed in a suite file (paths relative to it), in
/// order. Exit 0 iff every entry passes; 2 if any fails.
inline int run_suite(const std::string& path, std::ostream& out,
                     std::ostream& err, unsigned workers) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open suite file '" + path + "'");
  const auto dir = std::filesystem::path(path).parent_path();
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    entries.push_back(line);
  }
  out << "# drift-toolkit " << kToolkitVersion << ", suite=" << path << '\n';
  out << "spec,action,exit_code,verdict\n";
  int overall = 0;
  for (const auto& e : entries) {
    const auto full = (dir / e).string();
    auto spec = read_spec_file(full);
    if (workers > 0) spec.workers = workers;
    if (spec.action == "suite")
      throw UsageError("nested suites are not supported: " + e);
    std::ostringstream sink, errs;
    const int code = run_experiment(spec, sink, errs);
    const char* verdict = code == 0 ? "PASS" : code == 2 ? "FAIL" : "ERROR";
    out << detail::csv_field(e) << ',' << spec.action << ',' << code << ','
        << verdict << '\n';
    if (code != 0) {
      err << e << ": " << verdict;
      if (!errs.str().empty()) err << " (" << detail::trim(errs.str()) << ")";
      err << '\n';
      overall = 2;
    }
  }
  return overall;
}

}  // namespace drift
