#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "drift/errors.hpp"

namespace drift {

struct BitString {
  std::vector<std::uint8_t> bits;

  BitString() = default;
  explicit BitString(std::size_t n, bool value = false)
      : bits(n, value ? 1 : 0) {}
  BitString(std::initializer_list<int> init) {
    bits.reserve(init.size());
    for (int b : init) bits.push_back(b ? 1 : 0);
  }

  std::size_t size() const noexcept { return bits.size(); }
  std::uint8_t operator[](std::size_t i) const noexcept { return bits[i]; }
  void flip(std::size_t i) noexcept { bits[i] ^= 1; }
  void set(std::size_t i, bool v) noexcept { bits[i] = v ? 1 : 0; }

  friend bool operator==(const BitString&, const BitString&) = default;
};

inline std::uint64_t one_max(const BitString& x) {
  std::uint64_t s = 0;
  for (auto b : x.bits) s += b;
  return s;
}

inline std::uint64_t leading_ones(const BitString& x) {
  std::uint64_t k = 0;
  while (k < x.size() && x.bits[k]) ++k;
  return k;
}

inline constexpr std::size_t kMaxBinValDimension = 63;

inline std::uint64_t bin_val(const BitString& x) {
  if (x.size() > kMaxBinValDimension)
    throw UnsupportedDimension("BinVal supports n <= 63, got n = " +
                               std::to_string(x.size()));
  std::uint64_t v = 0;
  for (auto b : x.bits) v = (v << 1) | b;
  return v;
}

/// Positive, nonincreasing weights w_1 >= ... >= w_n > 0.
class LinearWeights {
 public:
  LinearWeights() = default;
  explicit LinearWeights(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw ParameterError("linear weights must be nonempty");
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (!(w_[i] > 0.0) || !std::isfinite(w_[i]))
        throw ParameterError("linear weights must be finite and positive");
      if (i > 0 && w_[i] > w_[i - 1])
        throw ParameterError("linear weights must be sorted nonincreasing");
    }
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const noexcept { return w_[i]; }
  const std::vector<double>& values() const noexcept { return w_; }
  double total() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }

 private:
  std::vector<double> w_;
};

inline double linear(const BitString& x, const LinearWeights& w) {
  if (x.size() != w.size())
    throw DimensionError("bit string length " + std::to_string(x.size()) +
                         " does not match weight count " +
                         std::to_string(w.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x.bits[i]) s += w[i];
  return s;
}

enum class Direction { maximize, minimize };

/// Exact integer score, or a real for weighted linear functions.
using Score = std::variant<std::uint64_t, double>;

inline double score_to_double(const Score& s) {
  return std::visit([](auto v) { return static_cast<double>(v); }, s);
}

enum class FitnessKind { onemax, leading_ones, bin_val, linear };

class Fitness {
 public:
  static Fitness onemax() { return Fitness(FitnessKind::onemax); }
  static Fitness leading_ones() { return Fitness(FitnessKind::leading_ones); }
  static Fitness bin_val() { return Fitness(FitnessKind::bin_val); }
  static Fitness linear(LinearWeights w) {
    Fitness f(FitnessKind::linear);
    f.weights_ = std::move(w);
    return f;
  }

  FitnessKind kind() const noexcept { return kind_; }
  const LinearWeights& weights() const noexcept { return weights_; }

  std::string name() const {
    switch (kind_) {
      case FitnessKind::onemax: return "onemax";
      case FitnessKind::leading_ones: return "leadingones";
      case FitnessKind::bin_val: return "binval";
      case FitnessKind::linear: return "linear";
    }
    return "?";
  }

  /// Throws if this function cannot be evaluated on strings of length n.
  void check_dimension(std::size_t n) const {
    if (kind_ == FitnessKind::bin_val && n > kMaxBinValDimension)
      throw UnsupportedDimension("BinVal supports n <= 63, got n = " +
                                 std::to_string(n));
    if (kind_ == FitnessKind::linear && n != weights_.size())
      throw DimensionError("dimension " + std::to_string(n) +
                           " does not match weight count " +
                           std::to_string(weights_.size()));
  }

  Score operator()(const BitString& x) const {
    switch (kind_) {
      case FitnessKind::onemax: return drift::one_max(x);
      case FitnessKind::leading_ones: return drift::leading_ones(x);
      case FitnessKind::bin_val: return drift::bin_val(x);
      case FitnessKind::linear: return drift::linear(x, weights_);
    }
    return std::uint64_t{0};
  }

  /// Best attainable value for dimension n.
  Score optimum(std::size_t n, Direction dir) const {
    check_dimension(n);
    if (dir == Direction::minimize) {
      if (kind_ == FitnessKind::linear) return 0.0;
      return std::uint64_t{0};
    }
    switch (kind_) {
      case FitnessKind::onemax:
      case FitnessKind::leading_ones: return static_cast<std::uint64_t>(n);
      case FitnessKind::bin_val:
        return n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
      case FitnessKind::linear: return weights_.total();
    }
    return std::uint64_t{0};
  }

  /// Distance of a score to the optimum, as a potential value.
  double distance(const Score& s, std::size_t n, Direction dir) const {
    if (dir == Direction::minimize) return score_to_double(s);
    const Score best = optimum(n, dir);
    if (const auto* u = std::get_if<std::uint64_t>(&s))
      return static_cast<double>(std::get<std::uint64_t>(best) - *u);
    const double d = std::get<double>(best) - std::get<double>(s);
    return d < 0.0 ? 0.0 : d;
  }

  /// True iff candidate is at least as good as incumbent.
  static bool no_worse(const Score& candidate, const Score& incumbent,
                       Direction dir) {
    return dir == Direction::maximize ? !(candidate < incumbent)
                                      : !(incumbent < candidate);
  }

 private:
  explicit Fitness(FitnessKind k) : kind_(k) {}
  FitnessKind kind_;
  LinearWeights weights_;
};

inline LinearWeights read_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open weights file '" + path + "'");
  std::vector<double> w;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      w.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw ConfigurationError("bad weight '" + line + "' in " + path);
    }
  }
  return LinearWeights(std::move(w));
}

/// onemax | leadingones | binval | linear:<weights-file>
inline Fitness parse_fitness(std::string_view spec) {
  if (spec == "onemax") return Fitness::onemax();
  if (spec == "leadingones") return Fitness::leading_ones();
  if (spec == "binval") return Fitness::bin_val();
  if (spec.rfind("linear:", 0) == 0)
    return Fitness::linear(read_weights(std::string(spec.substr(7))));
  throw ConfigurationError("unknown fitness '" + std::string(spec) + "'");
}

}  // namespace drift
