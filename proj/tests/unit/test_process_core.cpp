#include <cmath>
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "drift/drift.hpp"

namespace {

using namespace drift;

TEST(StepRng, SameKeySameStream) {
  StepRng a(7, 3, 11), b(7, 3, 11);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(StepRng, DistinctKeysDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t t = 0; t < 4; ++t)
      for (std::uint64_t k = 0; k < 4; ++k) first.insert(StepRng(s, t, k)());
  EXPECT_EQ(first.size(), 64u);
}

TEST(StepRng, UniformBelowStaysInRange) {
  StepRng r(1, 2, 3);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(r.uniform_below(7), 7u);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(StepRng, GeometricMean) {
  StepRng r(5, 0, 0);
  const double p = 0.2;
  double sum = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) sum += static_cast<double>(r.geometric(p));
  // Failures before the first success: mean (1-p)/p = 4, sd ~ 4.47.
  EXPECT_NEAR(sum / m, 4.0, 5 * 4.47 / std::sqrt(m));
}

TEST(RunTrace, AlreadyAbsorbedHasZeroHittingTime) {
  auto p = chain_as_process(coupon_collector_chain(3), 0);
  const auto tr = run_trace(p, 100, 1);
  ASSERT_TRUE(tr.hitting_time);
  EXPECT_EQ(*tr.hitting_time, 0u);
  EXPECT_EQ(tr.potentials.size(), 1u);
}

TEST(RunTrace, ForcedTransitionHitsInOneStep) {
  auto p = chain_as_process(two_state_chain(1.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto tr = run_trace(p, 100, seed);
    ASSERT_TRUE(tr.hitting_time);
    EXPECT_EQ(*tr.hitting_time, 1u);
  }
}

TEST(RunTrace, RepeatedCallsAreIdentical) {
  auto p = chain_as_process(gamblers_ruin(0.0, 1, 200));
  const auto a = run_trace(p, 1'000'000, 7);
  const auto b = run_trace(p, 1'000'000, 7);
  EXPECT_EQ(a.potentials, b.potentials);
  EXPECT_EQ(a.hitting_time, b.hitting_time);
  EXPECT_EQ(a.truncated, b.truncated);
}

TEST(RunTrace, TruncationIsReported) {
  auto p = chain_as_process(weak_drift_walk(3, 30));
  const auto tr = run_trace(p, 5, 1);
  EXPECT_TRUE(tr.truncated);
  EXPECT_FALSE(tr.hitting_time);
  EXPECT_EQ(tr.potentials.size(), 6u);
}

TEST(RunTrace, RejectsZeroMaxSteps) {
  auto p = chain_as_process(two_state_chain(0.5));
  EXPECT_THROW(run_trace(p, 0, 1), std::invalid_argument);
}

TEST(RunTrace, ZeroOnlyAtTheEnd) {
  auto p = chain_as_process(gamblers_ruin(0.1, 5, 50));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto tr = run_trace(p, 100000, seed);
    ASSERT_TRUE(tr.hitting_time);
    for (std::size_t t = 0; t + 1 < tr.potentials.size(); ++t)
      EXPECT_GT(tr.potentials[t], 0.0);
    EXPECT_EQ(tr.potentials.back(), 0.0);
  }
}

TEST(ChainAsProcess, GeometricMeanMatches) {
  const double p = 0.25;
  auto proc = chain_as_process(two_state_chain(p));
  const auto st = estimate_hitting_time(proc, 20000, 1000, 3);
  EXPECT_NEAR(st.mean, 1.0 / p, 3.0 * st.std_error());
}

TEST(ChainAsProcess, StartAtZeroAlwaysZero) {
  auto proc = chain_as_process(gamblers_ruin(0.0, 3, 20), 0);
  const auto st = estimate_hitting_time(proc, 100, 1000, 1);
  EXPECT_EQ(st.mean, 0.0);
}

TEST(ChainAsProcess, CouponCollectorMean) {
  auto proc = chain_as_process(coupon_collector_chain(3));
  const auto st = estimate_hitting_time(proc, 100000, 100000, 11);
  EXPECT_NEAR(st.mean, 5.5, 3.0 * st.std_error());
}

TEST(ChainAsProcess, RejectsInvalidChain) {
  auto c = two_state_chain(0.5);
  c.rows[1][0].probability = 0.4;
  EXPECT_THROW(chain_as_process(c), ChainValidationError);
  EXPECT_THROW(chain_as_process(two_state_chain(0.5), 5), ParameterError);
}

TEST(ValidateChain, ValidChainHasNoViolations) {
  for (const auto& c : {coupon_collector_chain(5), gamblers_ruin(0.1, 2, 30),
                        weak_drift_walk(2, 20), random_decline_chain(2.0, 5, 40),
                        deterministic_chain(4), two_state_chain(0.3)}) {
    const auto rep = validate_chain(c);
    EXPECT_TRUE(rep.ok()) << rep.summary();
  }
}

TEST(ValidateChain, RowSumViolationNamesState) {
  auto c = coupon_collector_chain(3);
  c.rows[2][0].probability -= 0.1;
  const auto rep = validate_chain(c);
  ASSERT_TRUE(rep.has(ViolationKind::row_sum));
  bool named = false;
  for (const auto& v : rep.violations)
    if (v.kind == ViolationKind::row_sum) named = named || v.state == 2.0;
  EXPECT_TRUE(named);
}

TEST(ValidateChain, ZeroMustAbsorb) {
  auto c = two_state_chain(0.5);
  c.rows[0] = {{1, 1.0}};
  EXPECT_TRUE(validate_chain(c).has(ViolationKind::zero_not_absorbing));
}

TEST(ValidateChain, OtherViolations) {
  auto c = two_state_chain(0.5);
  c.rows[1][0].target = 9;
  EXPECT_TRUE(validate_chain(c).has(ViolationKind::bad_target));

  auto d = two_state_chain(0.5);
  d.rows[1][0].probability = -0.5;
  d.rows[1][1].probability = 1.5;
  EXPECT_TRUE(validate_chain(d).has(ViolationKind::negative_probability));

  auto e = two_state_chain(0.5);
  e.states = {1.0, 2.0};
  EXPECT_TRUE(validate_chain(e).has(ViolationKind::zero_missing));

  auto f = coupon_collector_chain(3);
  f.rows[3] = {{1, 0.5}, {3, 0.5}};
  EXPECT_TRUE(validate_chain(f).has(ViolationKind::not_birth_death));
}

TEST(ChainIo, RoundTrip) {
  const auto c = gamblers_ruin(0.05, 3, 12);
  std::stringstream ss;
  write_chain(ss, c);
  const auto d = read_chain(ss);
  ASSERT_EQ(d.size(), c.size());
  EXPECT_EQ(d.states, c.states);
  EXPECT_EQ(d.structure, ChainStructure::birth_death);
  const auto e1 = exact_hitting_times(c).expected_hitting;
  const auto e2 = exact_hitting_times(d).expected_hitting;
  for (std::size_t i = 0; i < e1.size(); ++i) EXPECT_DOUBLE_EQ(e1[i], e2[i]);
}

TEST(ChainIo, MalformedLineThrows) {
  std::stringstream ss("# chain v1\n1 0 abc\n");
  EXPECT_THROW(read_chain(ss), ConfigurationError);
}

// One-step frequencies from every state match the rows.
void expect_rows_match(const ExplicitChain& chain, std::uint64_t seed) {
  auto proc = chain_as_process(chain);
  const int samples = 100000;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    const auto& row = chain.rows[s];
    if (row.size() < 2) continue;
    std::map<std::size_t, double> expect;
    for (const auto& tr : row) expect[tr.target] += tr.probability;
    std::map<std::size_t, int> seen;
    for (int i = 0; i < samples; ++i) {
      std::size_t st = s;
      StepRng rng(seed, s, static_cast<std::uint64_t>(i));
      proc.step(st, rng);
      ++seen[st];
    }
    double chi2 = 0.0;
    int cells = 0;
    for (const auto& [t, p] : expect) {
      if (p <= 0.0) continue;
      const double e = p * samples;
      chi2 += (seen[t] - e) * (seen[t] - e) / e;
      ++cells;
    }
    for (const auto& [t, k] : seen) ASSERT_GT(expect[t], 0.0) << "impossible target";
    if (cells < 2) continue;
    boost::math::chi_squared dist(cells - 1);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 1e-3)
        << "state " << chain.states[s];
  }
}

TEST(ChainProperty, TransitionFrequenciesMatchRows) {
  expect_rows_match(gamblers_ruin(0.1, 1, 8), 1);
  expect_rows_match(coupon_collector_chain(6), 2);
  expect_rows_match(random_decline_chain(1.5, 4, 12), 3);
}

TEST(ChainFromTransitions, InfersBirthDeath) {
  const auto c = chain_from_transitions({{1, 0, 0.5}, {1, 1, 0.5}, {2, 1, 1.0}});
  EXPECT_EQ(c.structure, ChainStructure::birth_death);
  EXPECT_EQ(c.states.back(), 2.0);
  EXPECT_EQ(c.start, 2u);
  const auto g = chain_from_transitions({{2, 0, 1.0}, {1, 0, 1.0}});
  EXPECT_EQ(g.structure, ChainStructure::general);
}

}  // namespace
