#include <cmath>

#include <gtest/gtest.h>

#include "drift/drift.hpp"

namespace {

using namespace drift;

EAConfig config(std::size_t n, Direction dir, std::size_t lambda = 1,
                double c = 1.0, std::size_t tau = 1) {
  EAConfig cfg;
  cfg.n = n;
  cfg.direction = dir;
  cfg.lambda = lambda;
  cfg.mutation_c = c;
  cfg.tau = tau;
  return cfg;
}

double harmonic(int n) {
  double h = 0.0;
  for (int k = 1; k <= n; ++k) h += 1.0 / k;
  return h;
}

template <class P>
void expect_nonincreasing(const P& p, std::uint64_t seeds, std::uint64_t max_steps) {
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const auto tr = run_trace(p, max_steps, seed);
    for (std::size_t t = 1; t < tr.potentials.size(); ++t)
      ASSERT_LE(tr.potentials[t], tr.potentials[t - 1]) << "seed " << seed;
  }
}

TEST(EAConfig, Validation) {
  EXPECT_THROW(RlsProcess(Fitness::onemax(), config(0, Direction::maximize)),
               ParameterError);
  EXPECT_THROW(RlsProcess(Fitness::onemax(), config(5, Direction::maximize, 2)),
               ParameterError);
  EXPECT_THROW(OnePlusLambdaProcess(Fitness::onemax(),
                                    config(5, Direction::maximize, 1, 6.0)),
               ParameterError);
  EXPECT_THROW(RlsProcess(Fitness::bin_val(), config(64, Direction::minimize)),
               UnsupportedDimension);
}

TEST(Rls, LeadingOnesMean) {
  RlsProcess p(Fitness::leading_ones(), config(50, Direction::maximize));
  const auto st = estimate_hitting_time(p, 10000, kDefaultMaxSteps, 1);
  EXPECT_EQ(st.truncated_count, 0u);
  EXPECT_NEAR(st.mean, 1250.0, 3.0 * st.std_error());
}

TEST(Rls, StartAtOptimum) {
  auto cfg = config(30, Direction::minimize);
  cfg.init_ones = 0;
  RlsProcess p(Fitness::onemax(), cfg);
  const auto st = estimate_hitting_time(p, 50, 1000, 1);
  EXPECT_EQ(st.mean, 0.0);
}

TEST(Rls, OneMaxMatchesBirthDeathOracle) {
  const std::size_t n = 20;
  std::vector<std::tuple<double, double, double>> tr{{0, 0, 1.0}};
  for (std::size_t s = 1; s <= n; ++s) {
    const double down = static_cast<double>(s) / n;
    tr.emplace_back(s, s - 1, down);
    if (s < n) tr.emplace_back(s, s, 1.0 - down);
  }
  const auto chain = chain_from_transitions(tr);
  const double exact = exact_hitting_times(chain).expected_hitting[n];
  EXPECT_NEAR(exact, n * harmonic(static_cast<int>(n)), 1e-9);

  auto cfg = config(n, Direction::minimize);
  cfg.init_ones = n;
  RlsProcess p(Fitness::onemax(), cfg);
  const auto st = estimate_hitting_time(p, 20000, 100000, 5);
  EXPECT_NEAR(st.mean, exact, 3.0 * st.std_error());
}

TEST(Rls, BinValAndOneMaxCouple) {
  const auto cfg = config(60, Direction::minimize);
  RlsProcess a(Fitness::bin_val(), cfg), b(Fitness::onemax(), cfg);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto ta = simulate_trial(a, seed, 0, {});
    const auto tb = simulate_trial(b, seed, 0, {});
    ASSERT_TRUE(ta.hit && tb.hit);
    EXPECT_EQ(ta.steps, tb.steps) << "seed " << seed;
  }
}

TEST(OnePlusLambda, FullFlipAcceptsComplement) {
  auto cfg = config(5, Direction::minimize, 1, 5.0);
  cfg.init_ones = 5;
  OnePlusLambdaProcess p(Fitness::onemax(), cfg);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto tr = run_trace(p, 10, seed);
    ASSERT_TRUE(tr.hitting_time);
    EXPECT_EQ(*tr.hitting_time, 1u);
  }
}

TEST(OnePlusLambda, OneMaxSandwich) {
  const double n = 100;
  OnePlusLambdaProcess p(Fitness::onemax(), config(100, Direction::minimize));
  const auto st = estimate_hitting_time(p, 2000, kDefaultMaxSteps, 2);
  EXPECT_GE(st.mean, n * std::log(n) - 5 * n);
  EXPECT_LE(st.mean, std::exp(1.0) * (n * std::log(n) + n));
}

TEST(OnePlusLambda, MoreOffspringNeedFewerGenerations) {
  OnePlusLambdaProcess one(Fitness::onemax(), config(100, Direction::minimize));
  OnePlusLambdaProcess ten(Fitness::onemax(), config(100, Direction::minimize, 10));
  const auto a = estimate_hitting_time(one, 2000, kDefaultMaxSteps, 3);
  const auto b = estimate_hitting_time(ten, 2000, kDefaultMaxSteps, 3);
  EXPECT_LE(b.mean, a.mean + 3.0 * std::hypot(a.std_error(), b.std_error()));
}

TEST(Island, SingleIslandEqualsOnePlusOne) {
  const auto cfg = config(40, Direction::minimize);
  IslandProcess isl(Fitness::onemax(), cfg);
  OnePlusLambdaProcess ea(Fitness::onemax(), cfg);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto a = run_trace(isl, 100000, seed);
    const auto b = run_trace(ea, 100000, seed);
    EXPECT_EQ(a.potentials, b.potentials) << "seed " << seed;
  }
}

TEST(Island, MigrationKeepsPotentialNonincreasing) {
  IslandProcess p(Fitness::onemax(), config(50, Direction::minimize, 2, 1.0, 1));
  expect_nonincreasing(p, 50, 100000);
}

TEST(Island, MoreIslandsAreFaster) {
  IslandProcess four(Fitness::onemax(), config(50, Direction::minimize, 4, 1.0, 5));
  IslandProcess one(Fitness::onemax(), config(50, Direction::minimize, 1, 1.0, 5));
  const auto a = estimate_hitting_time(four, 1000, kDefaultMaxSteps, 4);
  const auto b = estimate_hitting_time(one, 1000, kDefaultMaxSteps, 4);
  EXPECT_LE(a.mean, b.mean + 3.0 * std::hypot(a.std_error(), b.std_error()));
}

TEST(Elitism, PotentialNeverIncreases) {
  expect_nonincreasing(RlsProcess(Fitness::leading_ones(), config(30, Direction::maximize)),
                       30, 100000);
  expect_nonincreasing(
      OnePlusLambdaProcess(Fitness::bin_val(), config(30, Direction::minimize, 3)),
      30, 100000);
  expect_nonincreasing(
      IslandProcess(Fitness::leading_ones(), config(20, Direction::maximize, 3, 1.0, 2)),
      30, 100000);
}

TEST(ShortcutRls, MeanAtMostN) {
  ShortcutRlsProcess p(100);
  const auto st = estimate_hitting_time(p, 10000, kDefaultMaxSteps, 6);
  EXPECT_LE(st.mean - 3.0 * st.std_error(), 100.0);
}

TEST(ShortcutRls, DriftMatchesFormula) {
  const double n = 100;
  ShortcutRlsProcess p(100);
  const auto pot = native_potential(p);
  const auto table = estimate_drift(p, pot, 4000, 7);
  int checked = 0;
  for (const auto& [s, b] : table.buckets) {
    if (s <= 0 || b.count < 2000) continue;
    const double exact = s / n + (1 - 1 / n) * s / n;
    EXPECT_NEAR(b.mean, exact, b.ci99() * 1.5) << "s=" << s;
    ++checked;
  }
  EXPECT_GT(checked, 5);
}

TEST(ShortcutRls, StartAtOptimum) {
  ShortcutRlsProcess p(20, 0);
  EXPECT_EQ(estimate_hitting_time(p, 10, 100, 1).mean, 0.0);
}

TEST(RandomDecline, ChainDrifts) {
  const auto c = random_decline_chain(0.5, 1, 4);
  const auto d = exact_drift_by_state(c);
  EXPECT_DOUBLE_EQ(d[*c.index_of(1.0)], 1.0);
  const auto c2 = random_decline_chain(2.0, 10, 40);
  EXPECT_NEAR(exact_drift_by_state(c2)[*c2.index_of(10.0)], 0.0, 1e-12);
}

TEST(RandomDecline, ProcessMatchesChain) {
  const auto chain = random_decline_chain(2.5, 40, 1000);
  const double exact = exact_hitting_times(chain).expected_hitting[chain.start];
  RandomDeclineProcess p(2.5, 40, 1000);
  const auto st = estimate_hitting_time(p, 20000, 100000, 8);
  EXPECT_NEAR(st.mean, exact, 3.0 * st.std_error());
}

TEST(WeakDrift, ExactDriftEverywhere) {
  const std::size_t n = 4;
  const auto c = weak_drift_walk(n, 80);
  const auto d = exact_drift_by_state(c);
  for (std::size_t i = 1; i < c.size(); ++i)
    EXPECT_NEAR(d[i], std::pow(4.0, -4.0), 1e-15) << "s=" << c.states[i];
}

TEST(WeakDrift, MonteCarloMatchesOracle) {
  const auto c = weak_drift_walk(3, 30);
  const double exact = exact_hitting_times(c).expected_hitting[c.start];
  EXPECT_NEAR(exact, 243.0, 1e-6);
  auto p = chain_as_process(c);
  const auto st = estimate_hitting_time(p, 10000, kDefaultMaxSteps, 9);
  EXPECT_NEAR(st.mean, exact, 3.0 * st.std_error());
}

TEST(GamblersRuin, Basics) {
  const auto c = gamblers_ruin(0.01, 1, 400);
  const auto d = exact_drift_by_state(c);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) EXPECT_NEAR(d[i], 0.02, 1e-12);
  auto p = chain_as_process(gamblers_ruin(0.0, 0, 20));
  EXPECT_EQ(estimate_hitting_time(p, 10, 100, 1).mean, 0.0);
  EXPECT_THROW(gamblers_ruin(0.5, 1, 10), ParameterError);
}

TEST(CouponCollector, DriftAndOracle) {
  const auto c = coupon_collector_chain(7);
  const auto d = exact_drift_by_state(c);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(d[i], c.states[i] / 7.0, 1e-12);
  EXPECT_NEAR(exact_hitting_times(coupon_collector_chain(3)).expected_hitting[3], 5.5,
              1e-12);
}

TEST(NegativeDriftWalk, DriftAndJumps) {
  NegativeDriftWalk w(40, 0.75, 0.25, 0.75, 0.75);
  EXPECT_EQ(w.start(), 30u);
  const auto table = estimate_drift(w, native_potential(w), 20, 1,
                                    DriftOptions{20000, 1, w.target_level()});
  for (const auto& [s, b] : table.buckets) {
    EXPECT_LE(b.max_jump, 1.0);
    EXPECT_EQ(b.tail_ge(2), 0.0);
    if (s > 10 && s < 40 && b.count > 1000) EXPECT_NEAR(b.mean, -0.5, b.ci99() * 1.5);
  }
}

}  // namespace
