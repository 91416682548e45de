#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "drift/errors.hpp"
#include "drift/estimator.hpp"
#include "drift/quadrature.hpp"

namespace drift {

/// X_0 given as a fixed value or as a set of draws.
class InitialCondition {
 public:
  static InitialCondition fixed(double s0) { return InitialCondition({s0}); }
  static InitialCondition samples(std::vector<double> v) {
    return InitialCondition(std::move(v));
  }

  const std::vector<double>& values() const noexcept { return v_; }
  bool is_fixed() const noexcept { return v_.size() == 1; }
  double max() const { return *std::max_element(v_.begin(), v_.end()); }

  double mean() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s / static_cast<double>(v_.size());
  }

  template <class F>
  double mean_of(F&& f) const {
    double s = 0.0;
    for (double x : v_) s += f(x);
    return s / static_cast<double>(v_.size());
  }

 private:
  explicit InitialCondition(std::vector<double> v) : v_(std::move(v)) {
    if (v_.empty()) throw ParameterError("initial condition needs a value");
    for (double x : v_)
      if (!(x >= 0.0) || !std::isfinite(x))
        throw ParameterError("initial values must be finite and >= 0");
  }
  std::vector<double> v_;
};

enum class TheoremId {
  T1a, T1b, T2, T3, T4, T5, T6, T7, T8_lower, T8_upper, T9_upper, T9_lower,
  T10_check
};

inline const char* to_string(TheoremId id) {
  switch (id) {
    case TheoremId::T1a: return "T1a";
    case TheoremId::T1b: return "T1b";
    case TheoremId::T2: return "T2";
    case TheoremId::T3: return "T3";
    case TheoremId::T4: return "T4";
    case TheoremId::T5: return "T5";
    case TheoremId::T6: return "T6";
    case TheoremId::T7: return "T7";
    case TheoremId::T8_lower: return "T8-lower";
    case TheoremId::T8_upper: return "T8-upper";
    case TheoremId::T9_upper: return "T9-upper";
    case TheoremId::T9_lower: return "T9-lower";
    case TheoremId::T10_check: return "T10-check";
  }
  return "?";
}

inline TheoremId parse_theorem(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(TheoremId::T10_check); ++i) {
    const auto id = static_cast<TheoremId>(i);
    if (s == to_string(id)) return id;
  }
  throw ConfigurationError("unknown theorem '" + s + "'");
}

/// Bounds on E[T] are lower bounds for T1b, T4, T5, T6 and upper otherwise.
inline bool is_lower_bound(TheoremId id) {
  return id == TheoremId::T1b || id == TheoremId::T4 || id == TheoremId::T5 ||
         id == TheoremId::T6;
}

inline bool is_tail_bound(TheoremId id) {
  return id == TheoremId::T7 || id == TheoremId::T8_lower ||
         id == TheoremId::T8_upper || id == TheoremId::T9_upper ||
         id == TheoremId::T9_lower;
}

enum class AssumptionStatus { checked_pass, checked_fail, assumed, inconclusive };

inline const char* to_string(AssumptionStatus s) {
  switch (s) {
    case AssumptionStatus::checked_pass: return "pass";
    case AssumptionStatus::checked_fail: return "fail";
    case AssumptionStatus::assumed: return "assumed";
    case AssumptionStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

struct Assumption {
  std::string key;   // short tag used in CSV flags
  std::string text;
  AssumptionStatus status = AssumptionStatus::assumed;
};

struct BoundResult {
  TheoremId theorem = TheoremId::T1a;
  double bound = 0.0;  // steps, or a probability for tail theorems
  std::optional<double> threshold;
  std::vector<Assumption> assumptions;
  // Probability bound above 1. The raw value is kept, never clamped.
  bool vacuous = false;
  // Hypothesis-check verdict (T10-check only).
  std::optional<bool> verdict;
  std::vector<std::string> violations;

  /// "key=status;key=status[;vacuous]"
  std::string flags() const {
    std::string out;
    for (const auto& a : assumptions) {
      if (!out.empty()) out += ';';
      out += a.key + "=" + to_string(a.status);
    }
    if (vacuous) out += out.empty() ? "vacuous" : ";vacuous";
    return out;
  }

  const Assumption* assumption(const std::string& key) const {
    for (const auto& a : assumptions)
      if (a.key == key) return &a;
    return nullptr;
  }
};

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterError(std::string(name) + " must be finite and > 0");
}

inline BoundResult probability_result(TheoremId id, double bound,
                                      std::optional<double> threshold) {
  BoundResult r;
  r.theorem = id;
  r.bound = bound;
  r.threshold = threshold;
  r.vacuous = bound > 1.0;
  return r;
}

inline void require_monotone(const DriftFunctionH& h, double lo, double hi) {
  const auto rep = check_monotone(h, lo, std::max(lo, hi));
  if (!rep.ok)
    throw HypothesisViolation(
        "h is not nondecreasing between " + fmt_value(rep.violation->first) +
        " and " + fmt_value(rep.violation->second));
}

}  // namespace detail

inline BoundResult additive_upper_bound(const InitialCondition& x0, double delta) {
  detail::require_positive(delta, "delta");
  BoundResult r;
  r.theorem = TheoremId::T1a;
  r.bound = x0.mean() / delta;
  r.assumptions.push_back({"drift", "drift >= delta at every nonzero state",
                           AssumptionStatus::assumed});
  return r;
}

inline BoundResult additive_lower_bound(const InitialCondition& x0, double delta) {
  detail::require_positive(delta, "delta");
  BoundResult r;
  r.theorem = TheoremId::T1b;
  r.bound = x0.mean() / delta;
  r.assumptions.push_back({"drift", "drift <= delta at every nonzero state",
                           AssumptionStatus::assumed});
  return r;
}

/// s_min/h(s_min) + E[int_{s_min}^{X_0} 1/h]; draws below s_min add nothing.
/// Sorted draws share the integral over the gaps between them.
inline double variable_drift_sum(const DriftFunctionH& h, double s_min,
                                 const InitialCondition& x0) {
  detail::require_positive(s_min, "s_min");
  const double head = s_min / h(s_min);
  std::vector<double> v = x0.values();
  std::sort(v.begin(), v.end());
  double acc = 0.0, total = 0.0, at = s_min;
  for (double x : v) {
    if (x > at) {
      acc += reciprocal_integral(h, at, x);
      at = x;
    }
    if (x > s_min) total += acc;
  }
  return head + total / static_cast<double>(v.size());
}

inline BoundResult variable_upper_bound(const DriftFunctionH& h, double s_min,
                                        const InitialCondition& x0) {
  detail::require_positive(s_min, "s_min");
  detail::require_monotone(h, s_min, x0.max());
  BoundResult r;
  r.theorem = TheoremId::T2;
  r.bound = variable_drift_sum(h, s_min, x0);
  r.assumptions.push_back({"monotone", "h nondecreasing on [s_min, max X0]",
                           AssumptionStatus::checked_pass});
  r.assumptions.push_back({"drift", "drift >= h(s) at every nonzero state",
                           AssumptionStatus::assumed});
  return r;
}

inline BoundResult multiplicative_upper_bound(double delta, double s_min,
                                              const InitialCondition& x0) {
  detail::require_positive(delta, "delta");
  detail::require_positive(s_min, "s_min");
  BoundResult r;
  r.theorem = TheoremId::T3;
  const double el = x0.mean_of(
      [&](double x) { return std::log(std::max(x, s_min) / s_min); });
  r.bound = (1.0 + el) / delta;
  r.assumptions.push_back({"drift", "drift >= delta s at every nonzero state",
                           AssumptionStatus::assumed});
  return r;
}

/// Result of checking a hypothesis against an empirical drift table.
struct HypothesisCheck {
  AssumptionStatus status = AssumptionStatus::assumed;
  std::vector<std::string> violations;
};

/// Jump-ratio condition 1/c <= h(max(X_{t+1}, s_min)) / h(X_t) <= c over
/// observed transitions; h monotone means the extreme successors suffice.
inline HypothesisCheck check_jump_ratio(const EmpiricalDriftTable& table,
                                        const DriftFunctionH& h, double c,
                                        double s_min,
                                        std::size_t min_samples = 100) {
  HypothesisCheck out{AssumptionStatus::checked_pass, {}};
  bool any = false;
  for (const auto& [s, b] : table.buckets) {
    if (s <= 0.0) continue;
    if (!b.exact && b.count < min_samples) continue;
    any = true;
    const double hs = h(s);
    for (double nxt : {b.min_next, b.max_next}) {
      const double ratio = h(std::max(nxt, s_min)) / hs;
      if (ratio < 1.0 / c || ratio > c) {
        out.status = AssumptionStatus::checked_fail;
        out.violations.push_back("s=" + detail::fmt_value(s) + " next=" +
                                 detail::fmt_value(nxt) + " ratio=" +
                                 detail::fmt_value(ratio));
        break;
      }
    }
  }
  if (!any) out.status = AssumptionStatus::inconclusive;
  return out;
}

inline BoundResult variable_lower_bound_factor(
    const DriftFunctionH& h, double c, double s_min, const InitialCondition& x0,
    std::optional<HypothesisCheck> jump_check = {}) {
  if (!(c >= 1.0)) throw ParameterError("c must be >= 1");
  detail::require_positive(s_min, "s_min");
  detail::require_monotone(h, s_min, x0.max());
  BoundResult r;
  r.theorem = TheoremId::T4;
  r.bound = variable_drift_sum(h, s_min, x0) / c;
  r.assumptions.push_back({"monotone", "h nondecreasing on [s_min, max X0]",
                           AssumptionStatus::checked_pass});
  r.assumptions.push_back({"drift", "drift <= h(s) at every nonzero state",
                           AssumptionStatus::assumed});
  r.assumptions.push_back(
      {"jump-ratio", "1/c <= h(max(X_{t+1}, s_min)) / h(X_t) <= c",
       jump_check ? jump_check->status : AssumptionStatus::assumed});
  return r;
}

/// Lower bound 2: the caller passes the h whose composition with xi is the
/// drift, not the h of the upper bound.
inline BoundResult variable_lower_bound_xi(const DriftFunctionH& h, double s_min,
                                           const InitialCondition& x0,
                                           bool monotone_verified = false,
                                           bool xi_verified = false) {
  detail::require_positive(s_min, "s_min");
  detail::require_monotone(h, s_min, x0.max());
  BoundResult r;
  r.theorem = TheoremId::T5;
  r.bound = variable_drift_sum(h, s_min, x0);
  r.assumptions.push_back({"monotone", "h nondecreasing on [s_min, max X0]",
                           AssumptionStatus::checked_pass});
  r.assumptions.push_back(
      {"nonincreasing", "X_{t+1} <= X_t",
       monotone_verified ? AssumptionStatus::checked_pass
                         : AssumptionStatus::assumed});
  r.assumptions.push_back(
      {"xi", "X_{t+1} >= xi(X_t) and drift <= h(xi(s))",
       xi_verified ? AssumptionStatus::checked_pass : AssumptionStatus::assumed});
  return r;
}

/// Condition E[max(s' - X_{t+1}, 0) | X_t = s] <= delta s' for s' <= s,
/// evaluated on the successor histograms of a table.
inline HypothesisCheck check_relaxed_condition(const EmpiricalDriftTable& table,
                                               double delta,
                                               std::size_t min_samples = 100) {
  HypothesisCheck out{AssumptionStatus::checked_pass, {}};
  std::vector<double> levels;
  for (const auto& [s, b] : table.buckets) {
    if (s > 0.0) levels.push_back(s);
    for (const auto& [v, w] : b.successors)
      if (v > 0.0) levels.push_back(v);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  bool any = false;
  for (const auto& [s, b] : table.buckets) {
    if (s <= 0.0 || b.successors.empty()) continue;
    if (!b.exact && b.count < min_samples) continue;
    any = true;
    for (double sp : levels) {
      if (sp > s) break;
      double e = 0.0;
      for (const auto& [v, w] : b.successors)
        if (v < sp) e += (sp - v) * w;
      e /= b.weight;
      if (e > delta * sp * (1.0 + 1e-12)) {
        out.status = AssumptionStatus::checked_fail;
        out.violations.push_back("s=" + detail::fmt_value(s) + " s'=" +
                                 detail::fmt_value(sp));
        break;
      }
    }
  }
  if (!any) out.status = AssumptionStatus::inconclusive;
  return out;
}

/// Large-jump condition Pr[X_t - X_{t+1} >= beta s] <= beta delta /
/// (1 + ln(s/s_min)), evaluated on successor histograms.
inline HypothesisCheck check_multiplicative_jumps(const EmpiricalDriftTable& table,
                                                  double beta, double delta,
                                                  double s_min,
                                                  std::size_t min_samples = 100) {
  HypothesisCheck out{AssumptionStatus::checked_pass, {}};
  bool any = false;
  for (const auto& [s, b] : table.buckets) {
    if (s <= 0.0 || b.successors.empty()) continue;
    if (!b.exact && b.count < min_samples) continue;
    any = true;
    double p = 0.0;
    for (const auto& [v, w] : b.successors)
      if (s - v >= beta * s) p += w;
    p /= b.weight;
    const double limit = beta * delta / (1.0 + std::log(s / s_min));
    if (p > limit * (1.0 + 1e-12)) {
      out.status = AssumptionStatus::checked_fail;
      out.violations.push_back("s=" + detail::fmt_value(s));
    }
  }
  if (!any) out.status = AssumptionStatus::inconclusive;
  return out;
}

enum class MonotoneVariant { monotone, relaxed };

inline BoundResult multiplicative_lower_bound(
    double delta, double beta, double s_min, const InitialCondition& x0,
    MonotoneVariant variant = MonotoneVariant::monotone,
    std::optional<HypothesisCheck> jump_check = {},
    std::optional<HypothesisCheck> relaxed_check = {}) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in (0, 1]");
  if (!(delta > 0.0 && delta <= 1.0)) throw ParameterError("delta must lie in (0, 1]");
  detail::require_positive(s_min, "s_min");
  BoundResult r;
  r.theorem = TheoremId::T6;
  const double el = x0.mean_of(
      [&](double x) { return std::log(std::max(x, s_min) / s_min); });
  r.bound = (1.0 - beta) / (1.0 + beta) * (1.0 + el) / delta;
  if (variant == MonotoneVariant::monotone) {
    r.assumptions.push_back({"nonincreasing", "X_{t+1} <= X_t",
                             AssumptionStatus::assumed});
    r.assumptions.push_back({"drift", "drift <= delta s",
                             AssumptionStatus::assumed});
  } else {
    r.assumptions.push_back(
        {"relaxed", "E[max(s' - X_{t+1}, 0) | X_t = s] <= delta s' for s' <= s",
         relaxed_check ? relaxed_check->status : AssumptionStatus::assumed});
  }
  r.assumptions.push_back(
      {"jumps", "Pr[X_t - X_{t+1} >= beta X_t] <= beta delta / (1 + ln(s/s_min))",
       jump_check ? jump_check->status : AssumptionStatus::assumed});
  if (beta >= 0.5)
    r.assumptions.push_back(
        {"truncation",
         "beta >= 1/2 makes the bound weak; truncating the state space near "
         "s_min can restore it",
         AssumptionStatus::assumed});
  return r;
}

inline BoundResult multiplicative_tail_upper(double delta, double s0,
                                             double s_min, double r) {
  detail::require_positive(delta, "delta");
  detail::require_positive(s_min, "s_min");
  if (s0 < s_min) throw ParameterError("s0 must be >= s_min");
  if (!(r >= 0.0)) throw ParameterError("r must be >= 0");
  auto res = detail::probability_result(
      TheoremId::T7, std::exp(-r), std::ceil((r + std::log(s0 / s_min)) / delta));
  res.assumptions.push_back({"drift", "drift >= delta s at every nonzero state",
                             AssumptionStatus::assumed});
  return res;
}

enum class TailDirection { lower, upper };

/// lower: bound on Pr[T <= (s0 - x)/delta]; upper: Pr[T >= (s0 + x)/delta].
inline BoundResult additive_tail_bound(double delta, double eta, double jump_r,
                                       double s0, double x, TailDirection dir) {
  detail::require_positive(delta, "delta");
  detail::require_positive(eta, "eta");
  detail::require_positive(jump_r, "jump_r");
  detail::require_positive(s0, "s0");
  if (!(x >= 0.0)) throw ParameterError("x must be >= 0");
  const bool lower = dir == TailDirection::lower;
  auto res = detail::probability_result(
      lower ? TheoremId::T8_lower : TheoremId::T8_upper,
      additive_tail_value(delta, eta, jump_r, s0, x),
      (lower ? s0 - x : s0 + x) / delta);
  res.assumptions.push_back({"jumps", "Pr[|X_{t+1} - X_t| > j] <= r (1+eta)^-j",
                             AssumptionStatus::assumed});
  res.assumptions.push_back(
      {"drift", lower ? "drift <= delta" : "drift >= delta",
       AssumptionStatus::assumed});
  return res;
}

/// beta given as a constant or as beta(0), beta(1), ...; a sequence shorter
/// than t repeats its last entry.
struct BetaSchedule {
  std::vector<double> values;

  static BetaSchedule constant(double b) { return {{b}}; }

  double log_product(std::uint64_t t) const {
    if (values.empty()) throw ParameterError("beta schedule is empty");
    for (double b : values)
      if (!(b > 0.0)) throw ParameterError("beta values must be > 0");
    if (values.size() == 1)
      return static_cast<double>(t) * std::log(values.front());
    double s = 0.0;
    for (std::uint64_t r = 0; r < t; ++r)
      s += std::log(values[std::min<std::size_t>(r, values.size() - 1)]);
    return s;
  }
};

/// upper: Pr[T_a > t] < prod beta * e^{lambda (g(s0) - g(a))};
/// lower: Pr[T_a < t] <= prod beta * e^{-lambda (g(s0) - g(a))}.
/// g(0) = 0 and g(s) >= g(a) on (a, s_hi] are checked on a grid.
inline BoundResult general_drift_tail(const std::function<double(double)>& g,
                                      double lambda, const BetaSchedule& beta,
                                      double s0, double a, std::uint64_t t,
                                      TailDirection dir,
                                      std::optional<double> s_hi = {},
                                      std::size_t grid_points = 1000) {
  detail::require_positive(lambda, "lambda");
  if (!(a >= 0.0)) throw ParameterError("a must be >= 0");
  if (!(s0 > a)) throw ParameterError("s0 must be > a");
  if (g(0.0) != 0.0) throw HypothesisViolation("g(0) must be 0");
  const double top = std::max(s0, s_hi.value_or(s0));
  const double ga = g(a);
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double s = a + (top - a) * static_cast<double>(i) /
                             static_cast<double>(grid_points);
    if (g(s) < ga)
      throw HypothesisViolation("g(" + detail::fmt_value(s) + ") < g(a)");
  }
  const double spread = lambda * (g(s0) - ga);
  const double lp = beta.log_product(t);
  const bool upper = dir == TailDirection::upper;
  auto res = detail::probability_result(
      upper ? TheoremId::T9_upper : TheoremId::T9_lower,
      std::exp(upper ? lp + spread : lp - spread), static_cast<double>(t));
  res.assumptions.push_back({"g-grid", "g(0) = 0 and g(s) >= g(a) for s > a",
                             AssumptionStatus::checked_pass});
  res.assumptions.push_back(
      {"mgf", upper ? "E[e^{-lambda(g(X_t) - g(X_{t+1}))}] <= beta(t)"
                    : "E[e^{lambda(g(X_t) - g(X_{t+1}))}] >= beta(t)",
       AssumptionStatus::assumed});
  return res;
}

inline constexpr std::size_t kHypothesisMinSamples = 100;

/// Checks drift <= -delta and Pr[|delta X| >= j] <= r (1+eta)^-j on every
/// bucket with a n < s < n. States at the top n are left out: a finite walk
/// cannot drift upwards there. Sampled checks reject only at 99% confidence.
inline BoundResult negative_drift_conditions_check(
    const EmpiricalDriftTable& table, double a, double b, double n, double delta,
    double eta, double jump_r) {
  if (!(a < b)) throw ParameterError("need a < b");
  detail::require_positive(delta, "delta");
  detail::require_positive(eta, "eta");
  detail::require_positive(jump_r, "jump_r");
  BoundResult res;
  res.theorem = TheoremId::T10_check;
  bool drift_ok = true, jump_ok = true, inconclusive = false, any = false;
  for (const auto& [s, bk] : table.buckets) {
    if (!(s > a * n && s < n)) continue;
    if (!bk.exact && bk.count < kHypothesisMinSamples) {
      inconclusive = true;
      continue;
    }
    any = true;
    if (bk.mean - bk.ci99() > -delta) {
      drift_ok = false;
      res.violations.push_back("drift at s=" + detail::fmt_value(s) + " is " +
                               detail::fmt_value(bk.mean));
    }
    auto js = bk.floor_jumps.keys();
    js.insert(js.begin(), 0);
    for (auto j : js) {
      const double p = bk.tail_ge(j);
      const double lim = jump_r * std::pow(1.0 + eta, -static_cast<double>(j));
      const double p_low =
          bk.exact ? p
                   : wilson_interval(static_cast<std::size_t>(std::llround(p * bk.weight)),
                                     bk.count).first;
      if (p_low > lim * (1.0 + 1e-12)) {
        jump_ok = false;
        res.violations.push_back("jump tail at s=" + detail::fmt_value(s) +
                                 " j=" + std::to_string(j));
        break;
      }
    }
  }
  if (!any) inconclusive = true;
  auto status = [&](bool ok) {
    if (!ok) return AssumptionStatus::checked_fail;
    return any ? AssumptionStatus::checked_pass : AssumptionStatus::inconclusive;
  };
  res.assumptions.push_back({"drift", "drift <= -delta on (a n, n)", status(drift_ok)});
  res.assumptions.push_back({"jumps", "Pr[|X_t - X_{t+1}| >= j] <= r (1+eta)^-j",
                             status(jump_ok)});
  if (inconclusive)
    res.assumptions.push_back({"samples", "some buckets below 100 samples",
                               AssumptionStatus::inconclusive});
  res.verdict = drift_ok && jump_ok && any;
  res.bound = 0.0;
  return res;
}

}  // namespace drift
