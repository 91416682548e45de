#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "drift/errors.hpp"
#include "drift/process.hpp"
#include "drift/rng.hpp"

namespace drift {

enum class ChainStructure { general, birth_death };

struct Transition {
  std::size_t target = 0;
  double probability = 0.0;
};

/// Finite Markov chain whose state values are potential values. States are
/// sorted and distinct; the state with value 0 is absorbing.
struct ExplicitChain {
  std::vector<double> states;
  std::vector<std::vector<Transition>> rows;
  ChainStructure structure = ChainStructure::general;
  // Default start for simulation; builders set it, file input uses the top.
  std::size_t start = 0;

  std::size_t size() const noexcept { return states.size(); }

  std::optional<std::size_t> index_of(double value) const {
    auto it = std::lower_bound(states.begin(), states.end(), value);
    if (it == states.end() || *it != value) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
  }

  std::size_t edge_count() const noexcept {
    std::size_t e = 0;
    for (const auto& r : rows) e += r.size();
    return e;
  }
};

enum class ViolationKind {
  zero_missing,
  bad_state_values,
  row_count,
  bad_target,
  negative_probability,
  row_sum,
  zero_not_absorbing,
  not_birth_death,
};

struct ChainViolation {
  ViolationKind kind;
  double state = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<ChainViolation> violations;

  bool ok() const noexcept { return violations.empty(); }

  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const ChainViolation& v) { return v.kind == k; });
  }

  std::string summary() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.message;
    }
    return out;
  }
};

inline constexpr double kRowSumTolerance = 1e-12;

namespace detail {

inline std::string fmt_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline ValidationReport validate_chain(const ExplicitChain& chain) {
  ValidationReport report;
  auto add = [&](ViolationKind k, double s, std::string msg) {
    report.violations.push_back({k, s, std::move(msg)});
  };
  const auto& st = chain.states;
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (!std::isfinite(st[i]) || st[i] < 0.0 || (i > 0 && st[i] <= st[i - 1]))
      add(ViolationKind::bad_state_values, st[i],
          "state values must be finite, nonnegative, sorted and distinct "
          "(at " + detail::fmt_value(st[i]) + ")");
  }
  const auto zero = chain.index_of(0.0);
  if (!zero) add(ViolationKind::zero_missing, 0.0, "state 0 missing");
  if (chain.rows.size() != st.size()) {
    add(ViolationKind::row_count, 0.0,
        "row count " + std::to_string(chain.rows.size()) +
            " differs from state count " + std::to_string(st.size()));
    return report;
  }
  for (std::size_t i = 0; i < st.size(); ++i) {
    const std::string name = detail::fmt_value(st[i]);
    double sum = 0.0;
    for (const auto& tr : chain.rows[i]) {
      if (tr.target >= st.size()) {
        add(ViolationKind::bad_target, st[i],
            "state " + name + " has a transition to index " +
                std::to_string(tr.target) + " out of range");
        continue;
      }
      if (tr.probability < 0.0 || !std::isfinite(tr.probability))
        add(ViolationKind::negative_probability, st[i],
            "state " + name + " has a negative probability");
      if (chain.structure == ChainStructure::birth_death &&
          tr.probability > 0.0 &&
          (tr.target + 1 < i || tr.target > i + 1))
        add(ViolationKind::not_birth_death, st[i],
            "state " + name + " jumps more than one index in a birth-death chain");
      sum += tr.probability;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      add(ViolationKind::row_sum, st[i],
          "row of state " + name + " sums to " + detail::fmt_value(sum));
    if (zero && i == *zero) {
      for (const auto& tr : chain.rows[i]) {
        if (tr.target != i && tr.probability > 0.0) {
          add(ViolationKind::zero_not_absorbing, 0.0,
              "state 0 is not absorbing");
          break;
        }
      }
    }
  }
  return report;
}

inline void require_valid(const ExplicitChain& chain) {
  const auto report = validate_chain(chain);
  if (!report.ok()) throw ChainValidationError(report.summary());
}

/// Builds a chain from (from_value, to_value, probability) triples. The state
/// set is the union of all values. Tagged birth-death when every positive
/// transition moves at most one index.
inline ExplicitChain chain_from_transitions(
    const std::vector<std::tuple<double, double, double>>& triples) {
  ExplicitChain chain;
  for (const auto& [from, to, p] : triples) {
    chain.states.push_back(from);
    chain.states.push_back(to);
  }
  std::sort(chain.states.begin(), chain.states.end());
  chain.states.erase(std::unique(chain.states.begin(), chain.states.end()),
                     chain.states.end());
  chain.rows.resize(chain.states.size());
  bool adjacent = true;
  for (const auto& [from, to, p] : triples) {
    const auto i = *chain.index_of(from);
    const auto j = *chain.index_of(to);
    chain.rows[i].push_back({j, p});
    if (p > 0.0 && (j + 1 < i || j > i + 1)) adjacent = false;
  }
  chain.structure =
      adjacent ? ChainStructure::birth_death : ChainStructure::general;
  chain.start = chain.states.empty() ? 0 : chain.states.size() - 1;
  return chain;
}

inline constexpr std::string_view kChainHeader = "# chain v1";

inline void write_chain(std::ostream& out, const ExplicitChain& chain) {
  out << kChainHeader << '\n';
  for (std::size_t i = 0; i < chain.size(); ++i)
    for (const auto& tr : chain.rows[i])
      out << detail::fmt_value(chain.states[i]) << ' '
          << detail::fmt_value(chain.states[tr.target]) << ' '
          << detail::fmt_value(tr.probability) << '\n';
}

/// Parses the line-oriented chain format. Blank lines and further '#'
/// comment lines are ignored.
inline ExplicitChain read_chain(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kChainHeader, 0) != 0)
    throw ConfigurationError("chain file must start with '# chain v1'");
  std::vector<std::tuple<double, double, double>> triples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, c, extra;
    if (!(ls >> a >> b >> c) || (ls >> extra))
      throw ConfigurationError("chain file line " + std::to_string(lineno) +
                               ": expected 'from to probability'");
    auto parse = [&](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigurationError("chain file line " + std::to_string(lineno) +
                                 ": bad number '" + s + "'");
      return v;
    };
    triples.emplace_back(parse(a), parse(b), parse(c));
  }
  return chain_from_transitions(triples);
}

/// Simulates an ExplicitChain; the potential is the current state value.
class ChainProcess {
 public:
  using State = std::size_t;

  ChainProcess(ExplicitChain chain, std::size_t start_index,
               std::string label = "chain")
      : chain_(std::make_shared<const ExplicitChain>(std::move(chain))),
        start_(start_index),
        label_(std::move(label)) {
    require_valid(*chain_);
    if (start_ >= chain_->size())
      throw ParameterError("start index out of range");
    cumulative_.resize(chain_->size());
    for (std::size_t i = 0; i < chain_->size(); ++i) {
      double acc = 0.0;
      for (const auto& tr : chain_->rows[i]) {
        acc += tr.probability;
        cumulative_[i].push_back(acc);
      }
    }
  }

  State init(StepRng&) const { return start_; }

  void step(State& s, StepRng& rng) const {
    const auto& row = chain_->rows[s];
    const auto& cum = cumulative_[s];
    if (row.empty()) return;
    const double u = rng.uniform01() * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    auto k = static_cast<std::size_t>(it - cum.begin());
    if (k >= row.size()) k = row.size() - 1;
    while (row[k].probability <= 0.0 && k > 0) --k;
    s = row[k].target;
  }

  double potential(const State& s) const { return chain_->states[s]; }
  std::string descriptor() const { return label_; }

  const ExplicitChain& chain() const noexcept { return *chain_; }
  std::size_t start_index() const noexcept { return start_; }

 private:
  std::shared_ptr<const ExplicitChain> chain_;
  std::vector<std::vector<double>> cumulative_;
  std::size_t start_;
  std::string label_;
};

inline ChainProcess chain_as_process(ExplicitChain chain,
                                     std::size_t start_index) {
  return ChainProcess(std::move(chain), start_index);
}

inline ChainProcess chain_as_process(ExplicitChain chain) {
  const auto start = chain.start;
  return ChainProcess(std::move(chain), start);
}

}  // namespace drift
