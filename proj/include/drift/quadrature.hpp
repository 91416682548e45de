#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "drift/errors.hpp"

namespace drift {

enum class HForm { linear, affine, piecewise, tabulated, closed_form };

/// Drift lower-bound function h: (0, inf) -> (0, inf).
struct DriftFunctionH {
  HForm form = HForm::closed_form;
  std::function<double(double)> evaluate;
  // Optional F with F'(s) = 1 / h(s); enables exact integrals of 1/h.
  std::function<double(double)> reciprocal_antiderivative;
  // Points where h or its derivative may jump; quadrature splits there.
  std::vector<double> breakpoints;
  std::string label;

  double operator()(double s) const { return evaluate(s); }
};

/// h(s) = delta * s.
inline DriftFunctionH h_linear(double delta) {
  if (!(delta > 0.0)) throw ParameterError("h slope must be > 0");
  DriftFunctionH h;
  h.form = HForm::linear;
  h.evaluate = [delta](double s) { return delta * s; };
  h.reciprocal_antiderivative = [delta](double s) { return std::log(s) / delta; };
  h.label = "mul:" + std::to_string(delta);
  return h;
}

/// h(s) = alpha + beta * s with beta > 0.
inline DriftFunctionH h_affine(double alpha, double beta) {
  if (!(beta > 0.0)) throw ParameterError("affine h needs a positive slope");
  DriftFunctionH h;
  h.form = HForm::affine;
  h.evaluate = [alpha, beta](double s) { return alpha + beta * s; };
  h.reciprocal_antiderivative = [alpha, beta](double s) {
    return std::log(alpha + beta * s) / beta;
  };
  h.label = "affine";
  return h;
}

struct HSegment {
  enum class Kind { constant, multiplicative };
  double threshold = 0.0;  // segment applies for s >= threshold
  Kind kind = Kind::constant;
  double value = 0.0;      // h = value, or h = value * s
};

/// Piecewise h built from segments sorted by threshold. Below the first
/// threshold the first segment is extended.
inline DriftFunctionH h_piecewise(std::vector<HSegment> segs) {
  if (segs.empty()) throw ParameterError("piecewise h needs a segment");
  std::sort(segs.begin(), segs.end(),
            [](const HSegment& a, const HSegment& b) {
              return a.threshold < b.threshold;
            });
  for (const auto& s : segs)
    if (!(s.value > 0.0)) throw ParameterError("segment values must be > 0");
  auto find = [segs](double s) -> const HSegment& {
    std::size_t k = 0;
    while (k + 1 < segs.size() && s >= segs[k + 1].threshold) ++k;
    return segs[k];
  };
  auto seg_f = [](const HSegment& g, double s) {
    return g.kind == HSegment::Kind::constant ? s / g.value
                                              : std::log(s) / g.value;
  };
  // Offsets make the antiderivative continuous across thresholds.
  std::vector<double> offset(segs.size(), 0.0);
  for (std::size_t k = 1; k < segs.size(); ++k) {
    const double t = segs[k].threshold;
    offset[k] = offset[k - 1] + seg_f(segs[k - 1], t) - seg_f(segs[k], t);
  }
  DriftFunctionH h;
  h.form = HForm::piecewise;
  h.evaluate = [find](double s) {
    const auto& g = find(s);
    return g.kind == HSegment::Kind::constant ? g.value : g.value * s;
  };
  h.reciprocal_antiderivative = [segs, offset, seg_f](double s) {
    std::size_t k = 0;
    while (k + 1 < segs.size() && s >= segs[k + 1].threshold) ++k;
    return offset[k] + seg_f(segs[k], s);
  };
  for (std::size_t k = 1; k < segs.size(); ++k)
    h.breakpoints.push_back(segs[k].threshold);
  h.label = "piecewise";
  return h;
}

/// Linear interpolation through (s, h) points, constant outside the table.
inline DriftFunctionH h_tabulated(std::vector<std::pair<double, double>> pts) {
  if (pts.empty()) throw ParameterError("tabulated h needs points");
  std::sort(pts.begin(), pts.end());
  for (const auto& [s, v] : pts)
    if (!(v > 0.0)) throw ParameterError("tabulated h values must be > 0");
  DriftFunctionH h;
  h.form = HForm::tabulated;
  h.evaluate = [pts](double s) {
    if (s <= pts.front().first) return pts.front().second;
    if (s >= pts.back().first) return pts.back().second;
    auto it = std::upper_bound(
        pts.begin(), pts.end(), s,
        [](double v, const std::pair<double, double>& p) { return v < p.first; });
    const auto& [s1, h1] = *it;
    const auto& [s0, h0] = *(it - 1);
    return h0 + (h1 - h0) * (s - s0) / (s1 - s0);
  };
  for (const auto& p : pts) h.breakpoints.push_back(p.first);
  h.label = "table";
  return h;
}

inline DriftFunctionH h_closed_form(std::function<double(double)> f,
                                    std::string label,
                                    std::vector<double> breakpoints = {},
                                    std::function<double(double)> antider = {}) {
  DriftFunctionH h;
  h.form = HForm::closed_form;
  h.evaluate = std::move(f);
  h.reciprocal_antiderivative = std::move(antider);
  h.breakpoints = std::move(breakpoints);
  h.label = std::move(label);
  return h;
}

inline constexpr double kQuadratureTolerance = 1e-9;
inline constexpr std::size_t kSubdivisionCap = 1'000'000;

namespace detail {

struct Panel {
  double a, b, fa, fm, fb, whole, tol;
};

// Integrand after substituting sigma = e^u: d sigma = e^u du.
inline double log_integrand(const DriftFunctionH& h, double u) {
  const double s = std::exp(u);
  const double v = h(s);
  if (!(v > 0.0) || !std::isfinite(v))
    throw HypothesisViolation("h must be positive, h(" + std::to_string(s) +
                              ") = " + std::to_string(v));
  return s / v;
}

}  // namespace detail

/// Integral of 1/h over [lo, hi] by adaptive Simpson in log space, split at
/// the breakpoints of h. The per-panel tolerance is max(tol, 1e-12 |panel|).
inline double integrate_reciprocal(const DriftFunctionH& h, double lo,
                                   double hi, double tol = kQuadratureTolerance,
                                   std::size_t max_subdivisions = kSubdivisionCap) {
  if (!(lo > 0.0)) throw ParameterError("integration bounds must be > 0");
  if (hi < lo) throw ParameterError("need lo <= hi");
  if (!(tol > 0.0)) throw ParameterError("tolerance must be > 0");
  if (lo == hi) return 0.0;

  std::vector<double> cuts{std::log(lo)};
  for (double b : h.breakpoints)
    if (b > lo && b < hi) cuts.push_back(std::log(b));
  cuts.push_back(std::log(hi));

  // Seed each piece with a few panels so narrow features are not skipped.
  constexpr int kSeed = 8;
  const double total_width = cuts.back() - cuts.front();
  std::vector<detail::Panel> stack;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double w = (cuts[k + 1] - cuts[k]) / kSeed;
    for (int j = kSeed - 1; j >= 0; --j) {
      const double a = cuts[k] + j * w;
      const double b = (j == kSeed - 1) ? cuts[k + 1] : a + w;
      const double fa = detail::log_integrand(h, a);
      const double fb = detail::log_integrand(h, b);
      const double fm = detail::log_integrand(h, 0.5 * (a + b));
      stack.push_back({a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb),
                       tol * (b - a) / total_width});
    }
  }
  std::reverse(stack.begin(), stack.end());

  double sum = 0.0, comp = 0.0;
  auto accumulate = [&](double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  };
  std::size_t splits = 0;
  while (!stack.empty()) {
    const auto p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m), rm = 0.5 * (m + p.b);
    const double flm = detail::log_integrand(h, lm);
    const double frm = detail::log_integrand(h, rm);
    const double left = (m - p.a) / 6 * (p.fa + 4 * flm + p.fm);
    const double right = (p.b - m) / 6 * (p.fm + 4 * frm + p.fb);
    const double refined = left + right;
    const double err = refined - p.whole;
    const double allowed = std::max(p.tol, 1e-12 * std::abs(refined));
    if (std::abs(err) <= 15 * allowed || m == p.a || m == p.b) {
      accumulate(refined + err / 15);
      continue;
    }
    if (++splits > max_subdivisions) {
      for (const auto& q : stack) accumulate(q.whole);
      accumulate(refined);
      throw PrecisionError("quadrature subdivision cap exceeded", sum);
    }
    stack.push_back({m, p.b, p.fm, frm, p.fb, right, p.tol / 2});
    stack.push_back({p.a, m, p.fa, flm, p.fm, left, p.tol / 2});
  }
  return sum;
}

/// Uses the closed-form antiderivative when h carries one.
inline double reciprocal_integral(const DriftFunctionH& h, double lo,
                                  double hi, double tol = kQuadratureTolerance) {
  if (lo == hi) return 0.0;
  if (h.reciprocal_antiderivative)
    return h.reciprocal_antiderivative(hi) - h.reciprocal_antiderivative(lo);
  return integrate_reciprocal(h, lo, hi, tol);
}

struct MonotoneReport {
  bool ok = true;
  std::optional<std::pair<double, double>> violation;  // (s_i, s_{i+1})
  double h_left = 0.0, h_right = 0.0;
};

/// Checks h nondecreasing and positive on a uniform-in-log grid.
inline MonotoneReport check_monotone(const DriftFunctionH& h, double lo,
                                     double hi, std::size_t grid_points = 1000) {
  if (grid_points < 2) throw ParameterError("grid_points must be >= 2");
  if (!(lo > 0.0) || hi < lo) throw ParameterError("need 0 < lo <= hi");
  MonotoneReport rep;
  const double l0 = std::log(lo), l1 = std::log(hi);
  auto at = [&](std::size_t i) {
    if (i == 0) return lo;
    if (i + 1 == grid_points) return hi;
    return std::exp(l0 + (l1 - l0) * static_cast<double>(i) /
                             static_cast<double>(grid_points - 1));
  };
  double prev_s = at(0), prev = h(prev_s);
  if (!(prev > 0.0)) {
    rep.ok = false;
    rep.violation = {{prev_s, prev_s}};
    rep.h_left = rep.h_right = prev;
    return rep;
  }
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double s = at(i), v = h(s);
    if (!(v >= prev) || !(v > 0.0)) {
      rep.ok = false;
      rep.violation = {{prev_s, s}};
      rep.h_left = prev;
      rep.h_right = v;
      return rep;
    }
    prev_s = s;
    prev = v;
  }
  return rep;
}

namespace detail {

inline std::vector<std::string> data_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back(line);
  }
  return out;
}

inline double parse_double(std::string_view s, std::string_view what) {
  std::string tmp(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != tmp.size())
    throw ConfigurationError("bad number '" + tmp + "' for " +
                             std::string(what));
  return v;
}

}  // namespace detail

/// linear:<delta> | mul:<delta> | table:<file> | piecewise:<file>.
/// Table lines are "s h"; piecewise lines are "threshold const|mul value".
inline DriftFunctionH parse_h(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw ConfigurationError("h-spec needs 'kind:argument', got '" +
                             std::string(spec) + "'");
  const auto kind = spec.substr(0, colon);
  const auto arg = std::string(spec.substr(colon + 1));
  if (kind == "linear" || kind == "mul") {
    auto h = h_linear(detail::parse_double(arg, "h slope"));
    h.label = std::string(spec);
    return h;
  }
  if (kind == "table") {
    std::vector<std::pair<double, double>> pts;
    for (const auto& line : detail::data_lines(arg)) {
      std::istringstream ls(line);
      std::string a, b;
      if (!(ls >> a >> b))
        throw ConfigurationError("table line needs 's h': '" + line + "'");
      pts.emplace_back(detail::parse_double(a, "s"),
                       detail::parse_double(b, "h"));
    }
    auto h = h_tabulated(std::move(pts));
    h.label = std::string(spec);
    return h;
  }
  if (kind == "piecewise") {
    std::vector<HSegment> segs;
    for (const auto& line : detail::data_lines(arg)) {
      std::istringstream ls(line);
      std::string t, k, v;
      if (!(ls >> t >> k >> v) || (k != "const" && k != "mul"))
        throw ConfigurationError(
            "piecewise line needs 'threshold const|mul value': '" + line + "'");
      segs.push_back({detail::parse_double(t, "threshold"),
                      k == "const" ? HSegment::Kind::constant
                                   : HSegment::Kind::multiplicative,
                      detail::parse_double(v, "value")});
    }
    auto h = h_piecewise(std::move(segs));
    h.label = std::string(spec);
    return h;
  }
  throw ConfigurationError("unknown h-spec kind '" + std::string(kind) + "'");
}

}  // namespace drift
