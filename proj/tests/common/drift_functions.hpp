#pragma once

// Drift functions of the worked examples, with independent closed forms for
// the integral of 1/h used as test oracles.

#include <algorithm>
#include <cmath>
#include <vector>

#include "drift/quadrature.hpp"

namespace drift::reference {

/// Drift delta*s below n and delta*s*ln(s)/ln(n) from n on.
inline DriftFunctionH gp_h(double n, double delta) {
  return h_closed_form(
      [n, delta](double s) {
        return s < n ? delta * s : delta * s * std::log(s) / std::log(n);
      },
      "gp", {n});
}

/// s_min/h(1) + int_1^{X0} 1/h with ln X0 given directly.
inline double gp_closed_form(double n, double delta, double log_x0) {
  const double ln_n = std::log(n);
  return 1.0 / delta + ln_n / delta +
         ln_n / delta * (std::log(log_x0) - std::log(ln_n));
}

struct Segment {
  double lo, hi;
  bool multiplicative;  // h = value * s, else h = value
  double value;
};

/// Piecewise drift of the (1+lambda) EA on OneMax with o(1) terms dropped.
inline std::vector<Segment> oplea_segments(double n, double lambda, double c) {
  const double ec = std::exp(-c);
  const double ln_n = std::log(n), ln_l = std::log(lambda);
  const double t1 = n / (lambda * std::sqrt(ln_n));
  const double t2 = n / lambda;
  const double t3 = n / ln_l;
  const double t0 = n / std::pow(ln_l, 1.0 / std::log(std::log(ln_l)));
  std::vector<Segment> segs{
      {0.0, t1, true, c * ec * lambda / n},
      {t1, t2, false, ec * c / std::sqrt(ln_n)},
      {t2, t3, false, ec * std::min(c, 1.0) / 2.0},
      {t3, t0, false, 0.5 * ec * ln_l / std::log(ln_l)},
      {t0, 1e300, false, ln_l / std::log(ln_l)}};
  return segs;
}

inline DriftFunctionH oplea_h(double n, double lambda, double c) {
  const auto segs = oplea_segments(n, lambda, c);
  std::vector<double> cuts;
  for (std::size_t k = 1; k < segs.size(); ++k) cuts.push_back(segs[k].lo);
  return h_closed_form(
      [segs](double s) {
        for (const auto& g : segs)
          if (s < g.hi) return g.multiplicative ? g.value * s : g.value;
        return segs.back().value;
      },
      "oplea", cuts);
}

/// int_lo^hi 1/h summed segment by segment.
inline double oplea_closed_form(double n, double lambda, double c, double lo,
                                double hi) {
  double total = 0.0;
  for (const auto& g : oplea_segments(n, lambda, c)) {
    const double a = std::max(lo, g.lo), b = std::min(hi, g.hi);
    if (!(b > a)) continue;
    total += g.multiplicative ? std::log(b / a) / g.value : (b - a) / g.value;
  }
  return total;
}

/// Island-model drift c ln(lambda) / ln(n ln(lambda) / (tau s)).
inline DriftFunctionH island_h(double n, double lambda, double tau, double c) {
  return h_closed_form(
      [=](double s) {
        return c * std::log(lambda) / std::log(n * std::log(lambda) / (tau * s));
      },
      "island");
}

}  // namespace drift::reference
