#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

#include "drift/algorithms.hpp"
#include "drift/chain.hpp"
#include "drift/errors.hpp"
#include "drift/fitness.hpp"
#include "drift/oracle.hpp"
#include "drift/process.hpp"
#include "drift/quadrature.hpp"

namespace drift {

// Bit-string view of a state. Potentials defined on bit strings accept any
// state type with an overload here; other states fail to compile.
inline const BitString& bits_of(const BitString& x) { return x; }
inline const BitString& bits_of(const EaState& s) { return s.bits; }
inline const BitString& bits_of(const ShortcutRlsProcess::State& s) {
  return s.bits;
}

template <class State>
Potential<State> fitness_distance_potential(const Fitness& f, Direction dir) {
  return {[f, dir](const State& s) {
            const auto& x = bits_of(s);
            return f.distance(f(x), x.size(), dir);
          },
          "fitness"};
}

/// Y = X + 1 for X > 0, Y = 0 at X = 0.
inline double translate_value(double x) { return x > 0.0 ? x + 1.0 : 0.0; }

template <class State>
Potential<State> translated_potential(Potential<State> base) {
  auto label = "translated(" + base.label + ")";
  return {[b = std::move(base.evaluate)](const State& s) {
            return translate_value(b(s));
          },
          std::move(label)};
}

/// Y = 1 + ln X for X >= 1, Y = X on [0, 1).
inline double log_value(double x) { return x >= 1.0 ? 1.0 + std::log(x) : x; }

template <class State>
Potential<State> log_potential(Potential<State> base) {
  auto label = "log(" + base.label + ")";
  return {[b = std::move(base.evaluate)](const State& s) {
            return log_value(b(s));
          },
          std::move(label)};
}

/// The rescaling g of the variable drift argument:
/// g(s) = s / h(s_min) below s_min, s_min/h(s_min) + int_{s_min}^s 1/h above.
class Rescaling {
 public:
  Rescaling(DriftFunctionH h, double s_min, double s_max,
            std::size_t grid_points = 1000)
      : h_(std::move(h)), s_min_(s_min) {
    if (!(s_min > 0.0)) throw ParameterError("s_min must be > 0");
    if (s_max < s_min) s_max = s_min;
    const auto rep = check_monotone(h_, s_min, s_max, grid_points);
    if (!rep.ok)
      throw HypothesisViolation(
          "h is not nondecreasing: h(" + detail::fmt_value(rep.violation->first) +
          ") = " + detail::fmt_value(rep.h_left) + " > h(" +
          detail::fmt_value(rep.violation->second) +
          ") = " + detail::fmt_value(rep.h_right));
    h_min_ = h_(s_min_);
  }

  double operator()(double s) const {
    if (s <= s_min_) return s / h_min_;
    return s_min_ / h_min_ + reciprocal_integral(h_, s_min_, s);
  }

  const DriftFunctionH& h() const noexcept { return h_; }
  double s_min() const noexcept { return s_min_; }

 private:
  DriftFunctionH h_;
  double s_min_;
  double h_min_ = 1.0;
};

template <class State>
Potential<State> rescale_potential(Potential<State> base, DriftFunctionH h,
                                   double s_min, double s_max) {
  auto g = std::make_shared<const Rescaling>(std::move(h), s_min, s_max);
  auto label = "rescaled(" + base.label + "," + g->h().label + ")";
  return {[b = std::move(base.evaluate), g](const State& s) { return (*g)(b(s)); },
          std::move(label)};
}

/// 5/4 weight on the first floor(n/2) bits, weight 1 on the rest.
template <class State>
Potential<State> djw_potential(std::size_t n) {
  return {[n](const State& s) {
            const auto& x = bits_of(s);
            if (x.size() != n)
              throw DimensionError("djw potential expects n = " +
                                   std::to_string(n));
            const std::size_t half = n / 2;
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i)
              if (x[i]) v += i < half ? 1.25 : 1.0;
            return v;
          },
          "djw"};
}

template <class State>
Potential<State> onemax_potential() {
  return {[](const State& s) {
            return static_cast<double>(one_max(bits_of(s)));
          },
          "onemax"};
}

template <class State>
Potential<State> native_value_potential(std::string label = "native") {
  return {[](const State& s) { return static_cast<double>(s); },
          std::move(label)};
}

/// Canonical potential of a chain: state index -> E[T | state].
inline Potential<std::size_t> canonical_potential_exact(
    const ExplicitChain& chain) {
  auto table = std::make_shared<const std::vector<double>>(
      exact_hitting_times(chain).expected_hitting);
  return {[table](const std::size_t& i) { return (*table)[i]; }, "canonical"};
}

}  // namespace drift
