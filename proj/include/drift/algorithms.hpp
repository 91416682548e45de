#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drift/chain.hpp"
#include "drift/errors.hpp"
#include "drift/fitness.hpp"
#include "drift/process.hpp"
#include "drift/rng.hpp"

namespace drift {

struct EAConfig {
  std::size_t n = 0;
  std::size_t lambda = 1;
  double mutation_c = 1.0;
  std::size_t tau = 1;
  Direction direction = Direction::maximize;
  // Start from a string whose first init_ones bits are 1 instead of a
  // uniformly random string.
  std::optional<std::size_t> init_ones;

  void validate() const {
    if (n < 1) throw ParameterError("n must be >= 1");
    if (lambda < 1) throw ParameterError("lambda must be >= 1");
    if (!(mutation_c > 0.0) || mutation_c > static_cast<double>(n))
      throw ParameterError("mutation_c must satisfy 0 < c <= n");
    if (tau < 1) throw ParameterError("tau must be >= 1");
    if (init_ones && *init_ones > n)
      throw ParameterError("init_ones must be <= n");
  }
};

namespace detail {

inline BitString random_bitstring(std::size_t n, StepRng& rng) {
  BitString x(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = rng();
    x.bits[i] = static_cast<std::uint8_t>(word & 1);
    word >>= 1;
  }
  return x;
}

inline BitString initial_bitstring(const EAConfig& cfg, StepRng& rng) {
  if (!cfg.init_ones) return random_bitstring(cfg.n, rng);
  BitString x(cfg.n);
  for (std::size_t i = 0; i < *cfg.init_ones; ++i) x.bits[i] = 1;
  return x;
}

/// Flips each bit independently with probability p, skipping geometrically
/// between flipped positions.
inline void standard_mutation(BitString& x, double p, StepRng& rng) {
  const std::size_t n = x.size();
  std::uint64_t pos = rng.geometric(p);
  while (pos < n) {
    x.flip(static_cast<std::size_t>(pos));
    const auto gap = rng.geometric(p);
    if (gap >= n) break;
    pos += 1 + gap;
  }
}

}  // namespace detail

struct EaState {
  BitString bits;
  Score score;
};

/// Alg. 1 style random local search: flip one uniform bit, keep if no worse.
class RlsProcess {
 public:
  using State = EaState;

  RlsProcess(Fitness f, EAConfig cfg) : f_(std::move(f)), cfg_(cfg) {
    cfg_.validate();
    if (cfg_.lambda != 1) throw ParameterError("RLS requires lambda = 1");
    f_.check_dimension(cfg_.n);
  }

  State init(StepRng& rng) const {
    State s{detail::initial_bitstring(cfg_, rng), {}};
    s.score = f_(s.bits);
    return s;
  }

  void step(State& s, StepRng& rng) const {
    const auto i = static_cast<std::size_t>(rng.uniform_below(cfg_.n));
    s.bits.flip(i);
    Score y = f_(s.bits);
    if (Fitness::no_worse(y, s.score, cfg_.direction))
      s.score = y;
    else
      s.bits.flip(i);
  }

  double potential(const State& s) const {
    return f_.distance(s.score, cfg_.n, cfg_.direction);
  }

  std::string descriptor() const {
    return "rls(" + f_.name() + ",n=" + std::to_string(cfg_.n) + ")";
  }

  const Fitness& fitness() const noexcept { return f_; }
  const EAConfig& config() const noexcept { return cfg_; }

 private:
  Fitness f_;
  EAConfig cfg_;
};

/// (1+lambda) EA, mutation rate c/n; the best offspring (ties uniform)
/// replaces the parent if no worse. One generation is one step.
class OnePlusLambdaProcess {
 public:
  using State = EaState;

  OnePlusLambdaProcess(Fitness f, EAConfig cfg) : f_(std::move(f)), cfg_(cfg) {
    cfg_.validate();
    f_.check_dimension(cfg_.n);
  }

  State init(StepRng& rng) const {
    State s{detail::initial_bitstring(cfg_, rng), {}};
    s.score = f_(s.bits);
    return s;
  }

  void step(State& s, StepRng& rng) const {
    const double p = cfg_.mutation_c / static_cast<double>(cfg_.n);
    BitString best;
    Score best_score;
    std::size_t ties = 0;
    BitString y;
    for (std::size_t k = 0; k < cfg_.lambda; ++k) {
      y = s.bits;
      detail::standard_mutation(y, p, rng);
      Score fy = f_(y);
      if (ties == 0 || strictly_better(fy, best_score)) {
        best = y;
        best_score = fy;
        ties = 1;
      } else if (fy == best_score) {
        // Reservoir choice keeps the pick uniform over tied offspring.
        ++ties;
        if (rng.uniform_below(ties) == 0) best = y;
      }
    }
    if (Fitness::no_worse(best_score, s.score, cfg_.direction)) {
      s.bits = std::move(best);
      s.score = best_score;
    }
  }

  double potential(const State& s) const {
    return f_.distance(s.score, cfg_.n, cfg_.direction);
  }

  std::string descriptor() const {
    return "oplea(" + f_.name() + ",n=" + std::to_string(cfg_.n) +
           ",lambda=" + std::to_string(cfg_.lambda) + ")";
  }

  const EAConfig& config() const noexcept { return cfg_; }

 private:
  bool strictly_better(const Score& a, const Score& b) const {
    return cfg_.direction == Direction::maximize ? b < a : a < b;
  }

  Fitness f_;
  EAConfig cfg_;
};

struct IslandState {
  std::vector<EaState> islands;
  std::uint64_t generation = 0;
};

/// lambda independent (1+1) EAs with rate 1/n; every tau generations all
/// islands are replaced by the best one (ties uniform).
class IslandProcess {
 public:
  using State = IslandState;

  IslandProcess(Fitness f, EAConfig cfg) : f_(std::move(f)), cfg_(cfg) {
    cfg_.validate();
    f_.check_dimension(cfg_.n);
  }

  State init(StepRng& rng) const {
    State s;
    s.islands.reserve(cfg_.lambda);
    for (std::size_t i = 0; i < cfg_.lambda; ++i) {
      EaState e{detail::initial_bitstring(cfg_, rng), {}};
      e.score = f_(e.bits);
      s.islands.push_back(std::move(e));
    }
    return s;
  }

  void step(State& s, StepRng& rng) const {
    const double p = 1.0 / static_cast<double>(cfg_.n);
    BitString y;
    for (auto& isl : s.islands) {
      y = isl.bits;
      detail::standard_mutation(y, p, rng);
      Score fy = f_(y);
      if (Fitness::no_worse(fy, isl.score, cfg_.direction)) {
        isl.bits = y;
        isl.score = fy;
      }
    }
    ++s.generation;
    if (s.generation % cfg_.tau != 0) return;
    std::size_t best = 0, ties = 1;
    for (std::size_t i = 1; i < s.islands.size(); ++i) {
      const auto& a = s.islands[i].score;
      const auto& b = s.islands[best].score;
      const bool better =
          cfg_.direction == Direction::maximize ? b < a : a < b;
      if (better) {
        best = i;
        ties = 1;
      } else if (a == b) {
        ++ties;
        if (rng.uniform_below(ties) == 0) best = i;
      }
    }
    const EaState winner = s.islands[best];
    for (auto& isl : s.islands) isl = winner;
  }

  double potential(const State& s) const {
    double best = f_.distance(s.islands.front().score, cfg_.n, cfg_.direction);
    for (const auto& isl : s.islands)
      best = std::min(best, f_.distance(isl.score, cfg_.n, cfg_.direction));
    return best;
  }

  std::string descriptor() const {
    return "island(" + f_.name() + ",n=" + std::to_string(cfg_.n) +
           ",lambda=" + std::to_string(cfg_.lambda) +
           ",tau=" + std::to_string(cfg_.tau) + ")";
  }

 private:
  Fitness f_;
  EAConfig cfg_;
};

/// Minimizes OneMax. Each step jumps to the optimum with probability 1/n,
/// otherwise performs one RLS step.
class ShortcutRlsProcess {
 public:
  struct State {
    BitString bits;
    std::uint64_t ones = 0;
  };

  explicit ShortcutRlsProcess(std::size_t n,
                              std::optional<std::size_t> init_ones = {})
      : n_(n), init_ones_(init_ones) {
    if (n < 2) throw ParameterError("shortcut-rls requires n >= 2");
    if (init_ones && *init_ones > n)
      throw ParameterError("init_ones must be <= n");
  }

  State init(StepRng& rng) const {
    EAConfig cfg;
    cfg.n = n_;
    cfg.init_ones = init_ones_;
    State s{detail::initial_bitstring(cfg, rng), 0};
    s.ones = one_max(s.bits);
    return s;
  }

  void step(State& s, StepRng& rng) const {
    if (rng.bernoulli(1.0 / static_cast<double>(n_))) {
      std::fill(s.bits.bits.begin(), s.bits.bits.end(), 0);
      s.ones = 0;
      return;
    }
    const auto i = static_cast<std::size_t>(rng.uniform_below(n_));
    if (s.bits[i]) {
      s.bits.flip(i);
      --s.ones;
    }
  }

  double potential(const State& s) const {
    return static_cast<double>(s.ones);
  }

  std::string descriptor() const {
    return "shortcut-rls(n=" + std::to_string(n_) + ")";
  }

  std::size_t n() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::optional<std::size_t> init_ones_;
};

/// X_{t+1} uniform on {0, ..., min(floor(a X_t), cap)}, started at `start`.
class RandomDeclineProcess {
 public:
  using State = std::uint64_t;

  RandomDeclineProcess(double a, std::uint64_t start, std::uint64_t cap)
      : a_(a), start_(start), cap_(cap) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("a must be > 0");
    if (static_cast<double>(cap) < std::ceil(a * static_cast<double>(start)))
      throw ParameterError("cap must be >= ceil(a * start)");
  }

  State init(StepRng&) const { return start_; }

  void step(State& s, StepRng& rng) const {
    if (s == 0) return;
    const double top = std::floor(a_ * static_cast<double>(s));
    const std::uint64_t m =
        top >= static_cast<double>(cap_) ? cap_
                                         : static_cast<std::uint64_t>(top);
    s = rng.uniform_below(m + 1);
  }

  double potential(const State& s) const { return static_cast<double>(s); }

  std::string descriptor() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "random-decline(a=%g,n=%llu,N=%llu)", a_,
                  static_cast<unsigned long long>(start_),
                  static_cast<unsigned long long>(cap_));
    return buf;
  }

 private:
  double a_;
  std::uint64_t start_;
  std::uint64_t cap_;
};

/// Walk on {0..n}: up with p_up, down otherwise; at n it stays instead of
/// moving up. The monitored target is [0, a n].
class NegativeDriftWalk {
 public:
  using State = std::uint64_t;

  NegativeDriftWalk(std::uint64_t n, double p_up, double a, double b,
                    double start_fraction)
      : n_(n), p_up_(p_up), a_(a), b_(b) {
    if (n < 1) throw ParameterError("n must be >= 1");
    if (!(p_up > 0.5 && p_up < 1.0))
      throw ParameterError("p_up must lie in (1/2, 1)");
    if (!(a > 0.0 && a < b && b <= start_fraction && start_fraction <= 1.0) ||
        b >= 1.0)
      throw ParameterError("need 0 < a < b <= start_fraction <= 1, b < 1");
    start_ = static_cast<std::uint64_t>(
        std::ceil(start_fraction * static_cast<double>(n)));
  }

  State init(StepRng&) const { return start_; }

  void step(State& s, StepRng& rng) const {
    if (s == 0) return;
    if (rng.bernoulli(p_up_)) {
      if (s < n_) ++s;
    } else {
      --s;
    }
  }

  double potential(const State& s) const { return static_cast<double>(s); }

  /// Potential level at or below which the walk counts as having hit.
  double target_level() const { return a_ * static_cast<double>(n_); }

  std::string descriptor() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "negdrift-walk(n=%llu,pup=%g)",
                  static_cast<unsigned long long>(n_), p_up_);
    return buf;
  }

  std::uint64_t n() const noexcept { return n_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::uint64_t start() const noexcept { return start_; }

 private:
  std::uint64_t n_;
  double p_up_, a_, b_;
  std::uint64_t start_ = 0;
};

namespace detail {

inline ExplicitChain integer_chain(std::size_t top) {
  ExplicitChain c;
  c.states.resize(top + 1);
  for (std::size_t i = 0; i <= top; ++i) c.states[i] = static_cast<double>(i);
  c.rows.resize(top + 1);
  c.rows[0] = {{0, 1.0}};
  return c;
}

inline void add_edge(ExplicitChain& c, std::size_t from, std::size_t to,
                     double p) {
  if (p > 0.0) c.rows[from].push_back({to, p});
}

}  // namespace detail

/// States 0..n count missing coupons; from s move to s-1 w.p. s/n.
inline ExplicitChain coupon_collector_chain(std::size_t n) {
  if (n < 1) throw ParameterError("coupon collector requires n >= 1");
  auto c = detail::integer_chain(n);
  const double nn = static_cast<double>(n);
  for (std::size_t s = 1; s <= n; ++s) {
    const double down = static_cast<double>(s) / nn;
    detail::add_edge(c, s, s - 1, down);
    detail::add_edge(c, s, s, 1.0 - down);
  }
  c.structure = ChainStructure::birth_death;
  c.start = n;
  return c;
}

/// Down w.p. 1/2 + bias, up w.p. 1/2 - bias; at the cap the up move stays.
inline ExplicitChain gamblers_ruin(double bias, std::size_t start,
                                   std::size_t cap) {
  if (!(bias >= 0.0 && bias < 0.5))
    throw ParameterError("bias must lie in [0, 1/2)");
  if (!(start < cap)) throw ParameterError("start must be < N");
  auto c = detail::integer_chain(cap);
  const double down = 0.5 + bias, up = 0.5 - bias;
  for (std::size_t s = 1; s <= cap; ++s) {
    detail::add_edge(c, s, s - 1, down);
    detail::add_edge(c, s, s < cap ? s + 1 : s, up);
  }
  c.structure = ChainStructure::birth_death;
  c.start = start;
  return c;
}

/// Down w.p. (1 + n^-4)/2, up otherwise, started at n. At the cap the chain
/// moves down w.p. n^-4 and stays otherwise, so the drift is n^-4 there too.
inline ExplicitChain weak_drift_walk(std::size_t n, std::size_t cap) {
  if (n < 1) throw ParameterError("weak drift walk requires n >= 1");
  if (cap < 10 * n) throw ParameterError("weak drift walk requires N >= 10 n");
  const double eps = std::pow(static_cast<double>(n), -4.0);
  auto c = detail::integer_chain(cap);
  const double down = 0.5 * (1.0 + eps), up = 0.5 * (1.0 - eps);
  for (std::size_t s = 1; s < cap; ++s) {
    detail::add_edge(c, s, s - 1, down);
    detail::add_edge(c, s, s + 1, up);
  }
  detail::add_edge(c, cap, cap - 1, eps);
  detail::add_edge(c, cap, cap, 1.0 - eps);
  c.structure = ChainStructure::birth_death;
  c.start = n;
  return c;
}

/// From s > 0 move uniformly to {0, ..., min(floor(a s), N)}.
inline ExplicitChain random_decline_chain(double a, std::size_t start,
                                          std::size_t cap) {
  if (!(a > 0.0)) throw ParameterError("a must be > 0");
  if (static_cast<double>(cap) < std::ceil(a * static_cast<double>(start)))
    throw ParameterError("N must be >= ceil(a * start)");
  auto c = detail::integer_chain(cap);
  for (std::size_t s = 1; s <= cap; ++s) {
    const auto m = std::min<std::size_t>(
        static_cast<std::size_t>(std::floor(a * static_cast<double>(s))), cap);
    const double p = 1.0 / static_cast<double>(m + 1);
    for (std::size_t k = 0; k <= m; ++k) c.rows[s].push_back({k, p});
  }
  c.structure = ChainStructure::general;
  c.start = start;
  return c;
}

/// Chain on {0..s0} that moves down by one every step.
inline ExplicitChain deterministic_chain(std::size_t s0) {
  auto c = detail::integer_chain(s0);
  for (std::size_t s = 1; s <= s0; ++s) c.rows[s].push_back({s - 1, 1.0});
  c.structure = ChainStructure::birth_death;
  c.start = s0;
  return c;
}

/// Two states {0, 1}; from 1 absorb with probability p.
inline ExplicitChain two_state_chain(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
  auto c = detail::integer_chain(1);
  detail::add_edge(c, 1, 0, p);
  detail::add_edge(c, 1, 1, 1.0 - p);
  c.structure = ChainStructure::birth_death;
  c.start = 1;
  return c;
}

}  // namespace drift
