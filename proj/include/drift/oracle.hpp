#pragma once

// Exact answers for explicit chains: expected hitting times, tails and
// one-step drift.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "drift/chain.hpp"
#include "drift/errors.hpp"

namespace drift {

enum class OracleMethod { dense_elimination, tridiagonal };

inline const char* to_string(OracleMethod m) {
  return m == OracleMethod::tridiagonal ? "tridiagonal" : "dense-elimination";
}

struct OracleSolution {
  std::vector<double> expected_hitting;  // indexed like chain.states
  OracleMethod method = OracleMethod::dense_elimination;
  double residual = 0.0;                 // relative
};

inline constexpr std::size_t kDenseStateCap = 10'000;
inline constexpr std::size_t kTridiagonalStateCap = 10'000'000;
inline constexpr double kResidualLimit = 1e-9;

namespace detail {

inline std::size_t zero_index(const ExplicitChain& chain) {
  const auto z = chain.index_of(0.0);
  if (!z) throw ChainValidationError("state 0 missing");
  return *z;
}

/// States that can reach 0 with positive probability (reverse BFS).
inline std::vector<char> reaches_zero(const ExplicitChain& chain) {
  const std::size_t m = chain.size();
  std::vector<std::vector<std::size_t>> pred(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& tr : chain.rows[i])
      if (tr.probability > 0.0 && tr.target != i) pred[tr.target].push_back(i);
  std::vector<char> seen(m, 0);
  std::deque<std::size_t> queue{zero_index(chain)};
  seen[queue.front()] = 1;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (auto u : pred[v])
      if (!seen[u]) {
        seen[u] = 1;
        queue.push_back(u);
      }
  }
  return seen;
}

inline double relative_residual(const ExplicitChain& chain,
                                const std::vector<double>& e, std::size_t zero) {
  double worst = 0.0, scale = 1.0;
  for (double v : e) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i == zero) continue;
    double rhs = 1.0;
    for (const auto& tr : chain.rows[i]) rhs += tr.probability * e[tr.target];
    worst = std::max(worst, std::abs(e[i] - rhs));
  }
  return worst / scale;
}

inline OracleSolution solve_birth_death(const ExplicitChain& chain) {
  const std::size_t m = chain.size();
  if (m > kTridiagonalStateCap)
    throw SizeError("chain has " + std::to_string(m) +
                    " states, tridiagonal cap is 1e7");
  if (zero_index(chain) != 0)
    throw ChainValidationError("state 0 must be the smallest state");
  std::vector<double> down(m, 0.0), up(m, 0.0);
  for (std::size_t i = 1; i < m; ++i)
    for (const auto& tr : chain.rows[i]) {
      if (tr.target + 1 == i) down[i] += tr.probability;
      if (tr.target == i + 1) up[i] += tr.probability;
    }
  // d_i = E_i - E_{i-1} satisfies p-_i d_i = 1 + p+_i d_{i+1}; all terms are
  // positive so the downward sweep is stable.
  std::vector<double> d(m, 0.0);
  for (std::size_t i = m - 1; i >= 1; --i) {
    if (!(down[i] > 0.0))
      throw NoFiniteHittingTime("state " + detail::fmt_value(chain.states[i]) +
                                " cannot move towards 0");
    const double next = i + 1 < m ? d[i + 1] : 0.0;
    d[i] = (1.0 + up[i] * next) / down[i];
    if (!std::isfinite(d[i]))
      throw NoFiniteHittingTime("expected hitting time overflows");
  }
  OracleSolution sol;
  sol.method = OracleMethod::tridiagonal;
  sol.expected_hitting.assign(m, 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    acc += d[i];
    sol.expected_hitting[i] = acc;
  }
  sol.residual = relative_residual(chain, sol.expected_hitting, 0);
  return sol;
}

inline OracleSolution solve_dense(const ExplicitChain& chain) {
  const std::size_t m = chain.size();
  if (m > kDenseStateCap)
    throw SizeError("chain has " + std::to_string(m) +
                    " states, dense cap is 1e4");
  const std::size_t zero = zero_index(chain);
  std::vector<std::size_t> idx(m, m), states;
  for (std::size_t i = 0; i < m; ++i)
    if (i != zero) {
      idx[i] = states.size();
      states.push_back(i);
    }
  const std::size_t k = states.size();
  // (I - Q) E = 1 over the transient states.
  std::vector<double> a(k * k, 0.0), rhs(k, 1.0);
  for (std::size_t r = 0; r < k; ++r) {
    a[r * k + r] = 1.0;
    for (const auto& tr : chain.rows[states[r]])
      if (tr.target != zero) a[r * k + idx[tr.target]] -= tr.probability;
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r * k + col]) > std::abs(a[piv * k + col])) piv = r;
    if (!(std::abs(a[piv * k + col]) > 1e-300))
      throw NoFiniteHittingTime("singular hitting-time system");
    if (piv != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(a[col * k + c], a[piv * k + c]);
      std::swap(rhs[col], rhs[piv]);
    }
    const double p = a[col * k + col];
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = a[r * k + col] / p;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(k, 0.0);
  for (std::size_t r = k; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t c = r + 1; c < k; ++c) s -= a[r * k + c] * x[c];
    x[r] = s / a[r * k + r];
  }
  OracleSolution sol;
  sol.method = OracleMethod::dense_elimination;
  sol.expected_hitting.assign(m, 0.0);
  for (std::size_t r = 0; r < k; ++r) sol.expected_hitting[states[r]] = x[r];
  sol.residual = relative_residual(chain, sol.expected_hitting, zero);
  return sol;
}

}  // namespace detail

/// Solves E[T|s] = 1 + sum_s' P(s, s') E[T|s'] with E[T|0] = 0.
inline OracleSolution exact_hitting_times(const ExplicitChain& chain) {
  require_valid(chain);
  const auto reach = detail::reaches_zero(chain);
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (!reach[i])
      throw NoFiniteHittingTime("state " + detail::fmt_value(chain.states[i]) +
                                " never reaches 0");
  auto sol = chain.structure == ChainStructure::birth_death
                 ? detail::solve_birth_death(chain)
                 : detail::solve_dense(chain);
  for (double v : sol.expected_hitting)
    if (!std::isfinite(v) || v < 0.0)
      throw NoFiniteHittingTime("ill-conditioned hitting-time system");
  if (!(sol.residual < kResidualLimit))
    throw NoFiniteHittingTime("hitting-time residual " +
                              detail::fmt_value(sol.residual) +
                              " exceeds 1e-9");
  return sol;
}

inline constexpr std::uint64_t kTailWorkCap = 20'000'000'000ULL;

/// Pr[T > t] from start_index, pushing transient mass t times.
inline double exact_tail(const ExplicitChain& chain, std::size_t start_index,
                         std::uint64_t t) {
  require_valid(chain);
  if (start_index >= chain.size())
    throw ParameterError("start index out of range");
  const std::size_t zero = detail::zero_index(chain);
  if (start_index == zero) return 0.0;
  const auto edges = static_cast<std::uint64_t>(chain.edge_count());
  if (t > 0 && edges > kTailWorkCap / t)
    throw SizeError("exact_tail work t * edges exceeds cap");
  std::vector<double> mass(chain.size(), 0.0), next(chain.size(), 0.0);
  mass[start_index] = 1.0;
  for (std::uint64_t step = 0; step < t; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (i == zero || mass[i] == 0.0) continue;
      for (const auto& tr : chain.rows[i])
        if (tr.target != zero) next[tr.target] += mass[i] * tr.probability;
    }
    mass.swap(next);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (i != zero) total += mass[i];
  return total;
}

/// Delta(s) = sum_s' P(s, s') (v(s) - v(s')) per state index, for values v
/// attached to the states (the state values themselves by default).
inline std::vector<double> exact_drift_by_state(const ExplicitChain& chain,
                                                const std::vector<double>& v) {
  if (v.size() != chain.size())
    throw DimensionError("value vector does not match chain size");
  std::vector<double> d(chain.size(), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    double acc = 0.0;
    for (const auto& tr : chain.rows[i])
      acc += tr.probability * (v[i] - v[tr.target]);
    d[i] = acc;
  }
  return d;
}

inline std::vector<double> exact_drift_by_state(const ExplicitChain& chain) {
  return exact_drift_by_state(chain, chain.states);
}

}  // namespace drift
