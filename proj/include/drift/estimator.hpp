#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "drift/chain.hpp"
#include "drift/errors.hpp"
#include "drift/oracle.hpp"
#include "drift/parallel.hpp"
#include "drift/process.hpp"

namespace drift {

inline constexpr double kZ99 = 2.5758293035489004;

struct HittingTimeStats {
  std::size_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;
  double ci99_halfwidth = 0.0;
  double median = 0.0;
  std::size_t truncated_count = 0;
  // Hitting times of completed trials, in trial order.
  std::vector<std::uint64_t> times;

  std::size_t completed() const noexcept { return trials - truncated_count; }
  double std_error() const {
    return completed() ? std::sqrt(variance / static_cast<double>(completed()))
                       : 0.0;
  }
};

struct SimulationOptions {
  std::uint64_t max_steps = kDefaultMaxSteps;
  unsigned workers = 1;
  double target_level = 0.0;
};

/// Per-trial outcomes, identical for any worker count.
template <StochasticProcess P>
std::vector<TrialOutcome> run_trials(const P& process, std::size_t trials,
                                     std::uint64_t seed,
                                     const SimulationOptions& opts) {
  if (trials < 1) throw ParameterError("trials must be >= 1");
  std::vector<TrialOutcome> out(trials);
  const RunOptions run{opts.max_steps, opts.target_level};
  for_each_chunk(trials, opts.workers,
                 [&](std::size_t, std::size_t lo, std::size_t hi) {
                   for (std::size_t i = lo; i < hi; ++i)
                     out[i] = simulate_trial(process, seed, i, run);
                 });
  return out;
}

inline double median_of(std::vector<std::uint64_t> v) {
  if (v.empty()) return 0.0;
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  const double upper = static_cast<double>(v[h]);
  if (v.size() % 2) return upper;
  const double lower = static_cast<double>(
      *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
  return 0.5 * (lower + upper);
}

inline HittingTimeStats summarize(const std::vector<TrialOutcome>& outcomes) {
  HittingTimeStats st;
  st.trials = outcomes.size();
  for (const auto& o : outcomes) {
    if (o.hit)
      st.times.push_back(o.steps);
    else
      ++st.truncated_count;
  }
  if (st.times.empty())
    throw EstimationError("all " + std::to_string(st.trials) +
                          " trials hit max_steps");
  const double k = static_cast<double>(st.times.size());
  double sum = 0.0;
  for (auto t : st.times) sum += static_cast<double>(t);
  st.mean = sum / k;
  double ss = 0.0;
  for (auto t : st.times) {
    const double d = static_cast<double>(t) - st.mean;
    ss += d * d;
  }
  st.variance = st.times.size() > 1 ? ss / (k - 1.0) : 0.0;
  st.ci99_halfwidth = kZ99 * std::sqrt(st.variance / k);
  st.median = median_of(st.times);
  return st;
}

template <StochasticProcess P>
HittingTimeStats estimate_hitting_time(const P& process, std::size_t trials,
                                       std::uint64_t max_steps,
                                       std::uint64_t seed, unsigned workers = 1,
                                       double target_level = 0.0) {
  return summarize(run_trials(process, trials, seed,
                              {max_steps, workers, target_level}));
}

struct TailEstimate {
  std::uint64_t t = 0;
  std::size_t exceed = 0;
  std::size_t trials = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

inline std::pair<double, double> wilson_interval(std::size_t k, std::size_t n,
                                                 double z = kZ99) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

inline TailEstimate make_tail(std::uint64_t t, std::size_t exceed,
                              std::size_t trials) {
  TailEstimate e{t, exceed, trials,
                 static_cast<double>(exceed) / static_cast<double>(trials)};
  std::tie(e.ci_lo, e.ci_hi) = wilson_interval(exceed, trials);
  return e;
}

/// Fraction of trials with T > t.
template <StochasticProcess P>
TailEstimate estimate_tail(const P& process, std::size_t trials,
                           std::uint64_t t, std::uint64_t seed,
                           unsigned workers = 1, double target_level = 0.0) {
  if (trials < 1) throw ParameterError("trials must be >= 1");
  std::vector<char> exceed(trials, 0);
  for_each_chunk(trials, workers,
                 [&](std::size_t, std::size_t lo, std::size_t hi) {
                   for (std::size_t i = lo; i < hi; ++i) {
                     const RunOptions run{t, target_level};
                     exceed[i] = !simulate_trial(process, seed, i, run).hit;
                   }
                 });
  std::size_t k = 0;
  for (char e : exceed) k += e;
  return make_tail(t, k, trials);
}

/// Tail at t from already simulated hitting times. Truncated trials count as
/// exceeding, which is exact when t does not exceed their max_steps.
inline TailEstimate tail_from_stats(const HittingTimeStats& st,
                                    std::uint64_t t) {
  std::size_t k = st.truncated_count;
  for (auto x : st.times) k += x > t;
  return make_tail(t, k, st.trials);
}

/// One-sided p-value Pr[X >= k] for X ~ Binomial(n, p).
inline double binomial_upper_pvalue(std::size_t k, std::size_t n, double p) {
  if (k == 0) return 1.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
  return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
}

/// Histogram over nonnegative integer jump sizes.
class JumpHistogram {
 public:
  void add(std::uint64_t k, double w) {
    if (k < kDense) {
      if (dense_.size() <= k) dense_.resize(k + 1, 0.0);
      dense_[k] += w;
    } else {
      sparse_[k] += w;
    }
  }

  void merge(const JumpHistogram& o) {
    for (std::size_t k = 0; k < o.dense_.size(); ++k)
      if (o.dense_[k] != 0.0) add(k, o.dense_[k]);
    for (const auto& [k, w] : o.sparse_) add(k, w);
  }

  /// Total weight at keys >= j.
  double at_least(std::uint64_t j) const {
    double s = 0.0;
    for (std::size_t k = static_cast<std::size_t>(std::min<std::uint64_t>(j, dense_.size()));
         k < dense_.size(); ++k)
      s += dense_[k];
    for (auto it = sparse_.lower_bound(j); it != sparse_.end(); ++it)
      s += it->second;
    return s;
  }

  /// Keys with positive weight, ascending.
  std::vector<std::uint64_t> keys() const {
    std::vector<std::uint64_t> out;
    for (std::size_t k = 0; k < dense_.size(); ++k)
      if (dense_[k] > 0.0) out.push_back(k);
    for (const auto& [k, w] : sparse_)
      if (w > 0.0) out.push_back(k);
    return out;
  }

  bool empty() const { return keys().empty(); }

 private:
  static constexpr std::uint64_t kDense = 256;
  std::vector<double> dense_;
  std::map<std::uint64_t, double> sparse_;
};

namespace detail {

inline std::uint64_t jump_key(double v) {
  if (!(v < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(v);
}

}  // namespace detail

/// One-step statistics of transitions leaving one potential bucket.
struct DriftBucket {
  double lo = 0.0, hi = 0.0;
  double weight = 0.0;  // sample count, or 1 for exact buckets
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double max_jump = 0.0;
  double min_next = std::numeric_limits<double>::infinity();
  double max_next = -std::numeric_limits<double>::infinity();
  JumpHistogram floor_jumps;  // keyed by floor |delta|
  JumpHistogram ceil_jumps;   // keyed by ceil |delta|
  std::map<double, double> successors;  // optional: next value -> weight
  bool exact = false;

  void add(double delta, double next, double w, bool keep_successors) {
    count += 1;
    const double nw = weight + w;
    const double d = delta - mean;
    mean += d * w / nw;
    m2 += w * d * (delta - mean);
    weight = nw;
    const double a = std::abs(delta);
    max_jump = std::max(max_jump, a);
    min_next = std::min(min_next, next);
    max_next = std::max(max_next, next);
    floor_jumps.add(detail::jump_key(std::floor(a)), w);
    ceil_jumps.add(detail::jump_key(std::ceil(a)), w);
    if (keep_successors) successors[next] += w;
  }

  void merge(const DriftBucket& o) {
    if (o.weight == 0.0) return;
    if (weight == 0.0) {
      *this = o;
      return;
    }
    const double nw = weight + o.weight;
    const double d = o.mean - mean;
    mean += d * o.weight / nw;
    m2 += o.m2 + d * d * weight * o.weight / nw;
    weight = nw;
    count += o.count;
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
    max_jump = std::max(max_jump, o.max_jump);
    min_next = std::min(min_next, o.min_next);
    max_next = std::max(max_next, o.max_next);
    floor_jumps.merge(o.floor_jumps);
    ceil_jumps.merge(o.ceil_jumps);
    for (const auto& [v, w] : o.successors) successors[v] += w;
  }

  double variance() const {
    if (exact) return m2;
    return count > 1 ? m2 / (weight - 1.0) : 0.0;
  }
  double ci99() const {
    if (exact || count == 0) return 0.0;
    return kZ99 * std::sqrt(variance() / weight);
  }
  /// Pr[|delta| >= j] and Pr[|delta| > j] for integer j.
  double tail_ge(std::uint64_t j) const { return floor_jumps.at_least(j) / weight; }
  double tail_gt(std::uint64_t j) const {
    return j == std::numeric_limits<std::uint64_t>::max()
               ? 0.0
               : ceil_jumps.at_least(j + 1) / weight;
  }
};

enum class Binning { exact, geometric2 };

inline constexpr std::size_t kExactKeyLimit = 1'000'000;

struct EmpiricalDriftTable {
  std::map<double, DriftBucket> buckets;
  Binning binning = Binning::exact;
  bool exact = false;
  JumpHistogram floor_jumps, ceil_jumps;
  double total_weight = 0.0;

  const DriftBucket* find(double key) const {
    auto it = buckets.find(key);
    return it == buckets.end() ? nullptr : &it->second;
  }

  /// Bucket containing potential value v (exact or geometric lookup).
  const DriftBucket* bucket_for(double v) const {
    auto it = buckets.upper_bound(v);
    if (it == buckets.begin()) return nullptr;
    --it;
    const auto& b = it->second;
    if (v == b.lo || (v >= b.lo && v < b.hi)) return &b;
    return nullptr;
  }

  double tail_ge(std::uint64_t j) const {
    return total_weight > 0 ? floor_jumps.at_least(j) / total_weight : 0.0;
  }
  double tail_gt(std::uint64_t j) const {
    return total_weight > 0 && j < std::numeric_limits<std::uint64_t>::max()
               ? ceil_jumps.at_least(j + 1) / total_weight
               : 0.0;
  }

  void merge(const EmpiricalDriftTable& o) {
    for (const auto& [k, b] : o.buckets) {
      auto [it, inserted] = buckets.try_emplace(k, b);
      if (!inserted) it->second.merge(b);
    }
    floor_jumps.merge(o.floor_jumps);
    ceil_jumps.merge(o.ceil_jumps);
    total_weight += o.total_weight;
  }
};

/// Geometric factor-2 bin [2^(e-1), 2^e) containing v > 0; {0, 0} for 0.
inline std::pair<double, double> geometric_bin(double v) {
  if (v <= 0.0) return {0.0, 0.0};
  int e = 0;
  std::frexp(v, &e);
  return {std::ldexp(1.0, e - 1), std::ldexp(1.0, e)};
}

inline EmpiricalDriftTable rebin_geometric(const EmpiricalDriftTable& t) {
  EmpiricalDriftTable out;
  out.binning = Binning::geometric2;
  out.exact = t.exact;
  out.floor_jumps = t.floor_jumps;
  out.ceil_jumps = t.ceil_jumps;
  out.total_weight = t.total_weight;
  for (const auto& [k, b] : t.buckets) {
    const auto [lo, hi] = geometric_bin(k);
    auto [it, inserted] = out.buckets.try_emplace(lo, b);
    if (inserted) {
      it->second.lo = lo;
      it->second.hi = hi;
    } else {
      it->second.merge(b);
    }
  }
  for (auto& [k, b] : out.buckets) {
    b.lo = k;
    b.hi = geometric_bin(k).second;
  }
  return out;
}

struct DriftOptions {
  std::uint64_t max_steps = kDefaultMaxSteps;
  unsigned workers = 1;
  double target_level = 0.0;
  bool record_successors = false;
  std::size_t exact_key_limit = kExactKeyLimit;
};

/// Pools every observed transition by the potential value before the step.
/// Chunk tables are merged in chunk order, so the result does not depend on
/// the worker count.
template <StochasticProcess P>
EmpiricalDriftTable estimate_drift(const P& process,
                                   const Potential<typename P::State>& potential,
                                   std::size_t trials, std::uint64_t seed,
                                   const DriftOptions& opts = {}) {
  if (trials < 1) throw ParameterError("trials must be >= 1");
  std::vector<EmpiricalDriftTable> parts(chunk_count(trials));
  const RunOptions run{opts.max_steps, opts.target_level};
  for_each_chunk(trials, opts.workers, [&](std::size_t c, std::size_t lo,
                                           std::size_t hi) {
    auto& tab = parts[c];
    for (std::size_t i = lo; i < hi; ++i) {
      double prev = 0.0;
      simulate_trial(process, seed, i, run,
                     [&](std::uint64_t t, const auto& state, double) {
                       const double cur = potential_value(potential(state));
                       if (t > 0) {
                         auto [it, inserted] = tab.buckets.try_emplace(prev);
                         if (inserted) it->second.lo = it->second.hi = prev;
                         const double delta = prev - cur;
                         it->second.add(delta, cur, 1.0, opts.record_successors);
                         const double a = std::abs(delta);
                         tab.floor_jumps.add(detail::jump_key(std::floor(a)), 1.0);
                         tab.ceil_jumps.add(detail::jump_key(std::ceil(a)), 1.0);
                         tab.total_weight += 1.0;
                       }
                       prev = cur;
                     });
    }
  });
  EmpiricalDriftTable table;
  for (const auto& p : parts) table.merge(p);
  if (table.buckets.size() > opts.exact_key_limit) return rebin_geometric(table);
  return table;
}

/// Exact drift of a chain with values v attached to its states; state 0 is
/// left out. Jump histograms hold probabilities.
inline EmpiricalDriftTable exact_drift(const ExplicitChain& chain,
                                       const std::vector<double>& v) {
  require_valid(chain);
  if (v.size() != chain.size())
    throw DimensionError("value vector does not match chain size");
  const std::size_t zero = detail::zero_index(chain);
  EmpiricalDriftTable table;
  table.exact = true;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i == zero) continue;
    DriftBucket b;
    b.exact = true;
    b.lo = b.hi = v[i];
    b.weight = 1.0;
    b.count = std::numeric_limits<std::uint64_t>::max();
    double mean = 0.0;
    for (const auto& tr : chain.rows[i]) mean += tr.probability * (v[i] - v[tr.target]);
    double var = 0.0;
    for (const auto& tr : chain.rows[i]) {
      if (tr.probability <= 0.0) continue;
      const double d = v[i] - v[tr.target];
      var += tr.probability * (d - mean) * (d - mean);
      const double a = std::abs(d);
      b.max_jump = std::max(b.max_jump, a);
      b.min_next = std::min(b.min_next, v[tr.target]);
      b.max_next = std::max(b.max_next, v[tr.target]);
      b.floor_jumps.add(detail::jump_key(std::floor(a)), tr.probability);
      b.ceil_jumps.add(detail::jump_key(std::ceil(a)), tr.probability);
      b.successors[v[tr.target]] += tr.probability;
    }
    b.mean = mean;
    b.m2 = var;
    table.floor_jumps.merge(b.floor_jumps);
    table.ceil_jumps.merge(b.ceil_jumps);
    table.total_weight += 1.0;
    if (!table.buckets.try_emplace(v[i], std::move(b)).second)
      throw ParameterError("two states share the value " + detail::fmt_value(v[i]));
  }
  return table;
}

inline EmpiricalDriftTable exact_drift(const ExplicitChain& chain) {
  return exact_drift(chain, chain.states);
}

struct MgfBucket {
  std::uint64_t count = 0;
  double sum = 0.0;
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

struct MgfEstimate {
  std::map<double, MgfBucket> buckets;
  double max_beta = 0.0;
  std::uint64_t clipped = 0;
};

inline constexpr double kExponentClip = 700.0;

/// Per-bucket E[exp(-lambda (g(X_t) - g(X_{t+1})))], keyed by g(X_t).
template <StochasticProcess P>
MgfEstimate estimate_mgf_beta(const P& process,
                              const Potential<typename P::State>& g,
                              double lambda, std::size_t trials,
                              std::uint64_t seed, const DriftOptions& opts = {}) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  if (trials < 1) throw ParameterError("trials must be >= 1");
  std::vector<MgfEstimate> parts(chunk_count(trials));
  const RunOptions run{opts.max_steps, opts.target_level};
  for_each_chunk(trials, opts.workers, [&](std::size_t c, std::size_t lo,
                                           std::size_t hi) {
    auto& est = parts[c];
    for (std::size_t i = lo; i < hi; ++i) {
      double prev = 0.0;
      simulate_trial(process, seed, i, run,
                     [&](std::uint64_t t, const auto& state, double) {
                       const double cur = g(state);
                       if (t > 0) {
                         double e = -lambda * (prev - cur);
                         if (e > kExponentClip) {
                           e = kExponentClip;
                           ++est.clipped;
                         }
                         auto& b = est.buckets[prev];
                         ++b.count;
                         b.sum += lambda == 0.0 ? 1.0 : std::exp(e);
                       }
                       prev = cur;
                     });
    }
  });
  MgfEstimate out;
  for (const auto& p : parts) {
    for (const auto& [k, b] : p.buckets) {
      auto& d = out.buckets[k];
      d.count += b.count;
      d.sum += b.sum;
    }
    out.clipped += p.clipped;
  }
  for (const auto& [k, b] : out.buckets) out.max_beta = std::max(out.max_beta, b.mean());
  return out;
}

/// Theorem-8 style tail value exp{-(eta x / 8) min(1, eta^2 delta x / (32 r s0))}.
inline double additive_tail_value(double delta, double eta, double jump_r,
                                  double s0, double x) {
  const double m = std::min(1.0, eta * eta * delta * x / (32.0 * jump_r * s0));
  return std::exp(-(eta * x / 8.0) * m);
}

struct JumpProfile {
  double jump_r = 1.0;
  double eta = 0.0;
  double bound = 1.0;  // tail value at the caller's x
};

/// Smallest r with Pr[|delta| > j] <= r (1 + eta)^-j for every j, for the
/// given eta.
inline double fit_jump_r(const EmpiricalDriftTable& table, double eta) {
  double r = 0.0;
  if (table.exact) {
    // Exact tables must satisfy the condition at every state.
    for (const auto& [k, b] : table.buckets)
      for (auto key : b.ceil_jumps.keys()) {
        if (key == 0) continue;
        const std::uint64_t j = key - 1;
        r = std::max(r, b.tail_gt(j) * std::pow(1.0 + eta, static_cast<double>(j)));
      }
    return r;
  }
  if (table.total_weight <= 0.0) return 0.0;
  const auto keys = table.ceil_jumps.keys();
  if (keys.empty()) return 0.0;
  // Pr[|delta| > j] only drops at j = key; check j = key - 1 for every key.
  for (auto k : keys) {
    if (k == 0) continue;
    const std::uint64_t j = k - 1;
    r = std::max(r, table.tail_gt(j) * std::pow(1.0 + eta, static_cast<double>(j)));
  }
  return r;
}

/// Scans eta on a log grid and keeps the (r, eta) pair with the smallest
/// additive tail value at x.
inline JumpProfile jump_tail_profile(const EmpiricalDriftTable& table,
                                     double delta, double s0, double x,
                                     std::size_t grid = 400) {
  if (table.buckets.empty() || table.total_weight <= 0.0)
    throw ParameterError("jump_tail_profile needs a nonempty table");
  JumpProfile best{1.0, 0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < grid; ++i) {
    const double eta = std::pow(10.0, -3.0 + 5.0 * static_cast<double>(i) /
                                                static_cast<double>(grid - 1));
    double r = fit_jump_r(table, eta);
    if (r <= 0.0) r = std::numeric_limits<double>::min();
    const double b = additive_tail_value(delta, eta, r, s0, x);
    if (b < best.bound) best = {r, eta, b};
  }
  return best;
}

}  // namespace drift
