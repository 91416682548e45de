#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "drift/rng.hpp"

namespace drift {

inline constexpr std::uint64_t kDefaultMaxSteps = 100'000'000;

/// Validated potential value: finite and nonnegative.
inline double potential_value(double v) {
  if (!std::isfinite(v) || v < 0.0)
    throw std::domain_error("potential must be finite and nonnegative, got " +
                            std::to_string(v));
  return v;
}

/// A seedable, steppable random process with a real-valued potential.
/// Once the potential is 0 it stays 0.
template <class P>
concept StochasticProcess =
    requires(const P& p, typename P::State& s, const typename P::State& cs,
             StepRng& rng) {
      typename P::State;
      { p.init(rng) } -> std::same_as<typename P::State>;
      p.step(s, rng);
      { p.potential(cs) } -> std::convertible_to<double>;
      { p.descriptor() } -> std::convertible_to<std::string>;
    };

/// Maps a process state to a nonnegative real.
template <class State>
struct Potential {
  std::function<double(const State&)> evaluate;
  std::string label;

  double operator()(const State& s) const { return evaluate(s); }
};

template <StochasticProcess P>
Potential<typename P::State> native_potential(const P& process) {
  return {[&process](const typename P::State& s) {
            return static_cast<double>(process.potential(s));
          },
          "native"};
}

struct Trace {
  std::vector<double> potentials;
  std::optional<std::uint64_t> hitting_time;
  bool truncated = false;
  std::uint64_t seed = 0;
};

/// Target is the interval [0, target_level]; the default is the point 0.
/// A positive level is the potential shift used for interval targets.
struct RunOptions {
  std::uint64_t max_steps = kDefaultMaxSteps;
  double target_level = 0.0;
};

/// Result of one simulated trial without a stored trace.
struct TrialOutcome {
  std::uint64_t steps = 0;
  bool hit = false;
};

/// Runs one trial, calling visit(t, state, potential) for t = 0..end.
/// Step t -> t+1 draws from StepRng(seed, trial, t + 1); init uses step 0.
template <StochasticProcess P, class Visit>
TrialOutcome simulate_trial(const P& process, std::uint64_t seed,
                            std::uint64_t trial, const RunOptions& opts,
                            Visit&& visit) {
  StepRng init_rng(seed, trial, 0);
  auto state = process.init(init_rng);
  double x = potential_value(process.potential(state));
  std::uint64_t t = 0;
  visit(t, std::as_const(state), x);
  while (x > opts.target_level && t < opts.max_steps) {
    StepRng rng(seed, trial, t + 1);
    process.step(state, rng);
    ++t;
    x = potential_value(process.potential(state));
    visit(t, std::as_const(state), x);
  }
  return {t, x <= opts.target_level};
}

template <StochasticProcess P>
TrialOutcome simulate_trial(const P& process, std::uint64_t seed,
                            std::uint64_t trial, const RunOptions& opts) {
  return simulate_trial(process, seed, trial, opts,
                        [](std::uint64_t, const auto&, double) {});
}

/// Records the potential sequence until the target is hit or max_steps steps
/// have been taken. Deterministic in (process parameters, seed, trial).
template <StochasticProcess P>
Trace run_trace(const P& process, std::uint64_t max_steps, std::uint64_t seed,
                std::uint64_t trial = 0, double target_level = 0.0) {
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  Trace trace;
  trace.seed = seed;
  const auto out = simulate_trial(
      process, seed, trial, RunOptions{max_steps, target_level},
      [&](std::uint64_t, const auto&, double x) {
        trace.potentials.push_back(x);
      });
  if (out.hit)
    trace.hitting_time = out.steps;
  else
    trace.truncated = true;
  return trace;
}

}  // namespace drift
