#include <cmath>

#include <boost/math/distributions/binomial.hpp>
#include <gtest/gtest.h>

#include "drift/drift.hpp"

namespace {

using namespace drift;

double harmonic(int n) {
  double h = 0.0;
  for (int k = 1; k <= n; ++k) h += 1.0 / k;
  return h;
}

TEST(HittingTime, ForcedChain) {
  auto p = chain_as_process(two_state_chain(1.0));
  const auto st = estimate_hitting_time(p, 100, 10, 1);
  EXPECT_EQ(st.mean, 1.0);
  EXPECT_EQ(st.variance, 0.0);
  EXPECT_EQ(st.median, 1.0);
}

TEST(HittingTime, CouponCollectorMatchesOracle) {
  const auto c = coupon_collector_chain(20);
  const double exact = exact_hitting_times(c).expected_hitting[20];
  EXPECT_NEAR(exact, 20 * harmonic(20), 1e-9);
  const auto st = estimate_hitting_time(chain_as_process(c), 10000, 100000, 2);
  EXPECT_NEAR(st.mean, exact, 3 * st.std_error());
  EXPECT_LE(st.truncated_count, st.trials);
}

TEST(HittingTime, AllTruncatedThrows) {
  auto p = chain_as_process(coupon_collector_chain(50));
  EXPECT_THROW(estimate_hitting_time(p, 10, 3, 1), EstimationError);
}

TEST(HittingTime, TruncatedExcludedButCounted) {
  std::vector<TrialOutcome> v{{3, true}, {5, true}, {100, false}, {7, true}};
  const auto st = summarize(v);
  EXPECT_EQ(st.trials, 4u);
  EXPECT_EQ(st.truncated_count, 1u);
  EXPECT_DOUBLE_EQ(st.mean, 5.0);
  EXPECT_DOUBLE_EQ(st.variance, 4.0);
  EXPECT_DOUBLE_EQ(st.median, 5.0);
  EXPECT_NEAR(st.ci99_halfwidth, kZ99 * std::sqrt(4.0 / 3.0), 1e-12);
}

TEST(HittingTime, WorkerCountDoesNotMatter) {
  EAConfig cfg;
  cfg.n = 40;
  RlsProcess p(Fitness::leading_ones(), cfg);
  const auto a = estimate_hitting_time(p, 300, kDefaultMaxSteps, 5, 1);
  for (unsigned w : {2u, 4u, 16u}) {
    const auto b = estimate_hitting_time(p, 300, kDefaultMaxSteps, 5, w);
    EXPECT_EQ(a.times, b.times);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.variance, b.variance);
  }
}

TEST(Tail, Basics) {
  auto p = chain_as_process(coupon_collector_chain(5));
  EXPECT_EQ(estimate_tail(p, 100, 0, 1).p_hat, 1.0);
  const auto ci = wilson_interval(30, 100, kZ99);
  EXPECT_LT(ci.first, 0.3);
  EXPECT_GT(ci.second, 0.3);
}

TEST(Tail, FairGamblerWithin27Steps) {
  const auto c = gamblers_ruin(0.0, 1, 200);
  EXPECT_GE(1.0 - exact_tail(c, c.start, 27), 0.70);
  const auto est = estimate_tail(chain_as_process(c), 100000, 27, 3);
  EXPECT_GE(1.0 - est.p_hat, 0.70);
}

TEST(Tail, AgreesWithExactTail) {
  const auto c = gamblers_ruin(0.05, 5, 49);
  ASSERT_EQ(c.size(), 50u);
  auto p = chain_as_process(c);
  for (std::uint64_t t : {5u, 20u, 60u, 200u}) {
    const auto est = estimate_tail(p, 20000, t, 4);
    const double exact = exact_tail(c, c.start, t);
    EXPECT_GE(exact, est.ci_lo) << t;
    EXPECT_LE(exact, est.ci_hi) << t;
  }
}

TEST(Tail, ExactGeometric) {
  const auto c = two_state_chain(0.3);
  EXPECT_EQ(exact_tail(c, 1, 0), 1.0);
  EXPECT_EQ(exact_tail(c, 0, 4), 0.0);
  for (std::uint64_t t : {1u, 4u, 17u}) EXPECT_NEAR(exact_tail(c, 1, t), std::pow(0.7, t), 1e-14);
}

TEST(Tail, BinomialPvalueMatchesBoost) {
  boost::math::binomial dist(200, 0.1);
  EXPECT_NEAR(binomial_upper_pvalue(30, 200, 0.1),
              boost::math::cdf(boost::math::complement(dist, 29.0)), 1e-12);
  EXPECT_EQ(binomial_upper_pvalue(0, 200, 0.1), 1.0);
}

TEST(Drift, OneMaxBucketsMatchSOverN) {
  EAConfig cfg;
  cfg.n = 50;
  cfg.direction = Direction::minimize;
  RlsProcess p(Fitness::onemax(), cfg);
  const auto table = estimate_drift(p, native_potential(p), 2000, 6);
  int checked = 0;
  for (const auto& [s, b] : table.buckets) {
    if (b.count < 500) continue;
    EXPECT_NEAR(b.mean, s / 50.0, b.ci99()) << s;
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Drift, LeadingOnesNaiveBetweenOneAndTwoOverN) {
  EAConfig cfg;
  cfg.n = 30;
  RlsProcess p(Fitness::leading_ones(), cfg);
  const auto table = estimate_drift(p, native_potential(p), 3000, 7);
  for (const auto& [s, b] : table.buckets) {
    if (b.count < 500) continue;
    EXPECT_GE(b.mean + b.ci99(), 1.0 / 30) << s;
    EXPECT_LE(b.mean - b.ci99(), 2.0 / 30) << s;
  }
}

TEST(Drift, DeterministicChain) {
  auto p = chain_as_process(deterministic_chain(12));
  const auto table = estimate_drift(p, native_potential(p), 10, 1);
  EXPECT_EQ(table.buckets.size(), 12u);
  for (const auto& [s, b] : table.buckets) {
    EXPECT_EQ(b.mean, 1.0);
    EXPECT_EQ(b.variance(), 0.0);
  }
}

TEST(Drift, WorkerCountDoesNotMatter) {
  EAConfig cfg;
  cfg.n = 30;
  RlsProcess p(Fitness::leading_ones(), cfg);
  const auto pot = translated_potential(native_potential(p));
  const auto a = estimate_drift(p, pot, 200, 8, DriftOptions{kDefaultMaxSteps, 1});
  const auto b = estimate_drift(p, pot, 200, 8, DriftOptions{kDefaultMaxSteps, 4});
  ASSERT_EQ(a.buckets.size(), b.buckets.size());
  for (const auto& [k, x] : a.buckets) {
    const auto* y = b.find(k);
    ASSERT_NE(y, nullptr);
    EXPECT_EQ(x.count, y->count);
    EXPECT_EQ(x.mean, y->mean);
    EXPECT_EQ(x.m2, y->m2);
  }
}

TEST(Drift, GeometricBinning) {
  auto p = chain_as_process(deterministic_chain(40));
  DriftOptions o;
  o.exact_key_limit = 10;
  const auto table = estimate_drift(p, native_potential(p), 3, 1, o);
  EXPECT_EQ(table.binning, Binning::geometric2);
  const auto* b = table.bucket_for(20);
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->lo, 16.0);
  EXPECT_EQ(b->hi, 32.0);
  EXPECT_EQ(b->count, 48u);
}

TEST(ExactDrift, Examples) {
  const auto w = exact_drift(weak_drift_walk(10, 400));
  for (const auto& [s, b] : w.buckets) EXPECT_NEAR(b.mean, 1e-4, 1e-15) << s;
  EXPECT_EQ(w.find(0.0), nullptr);
  const auto r = exact_drift(random_decline_chain(2.0, 10, 40));
  EXPECT_NEAR(r.find(10.0)->mean, 0.0, 1e-12);
  EXPECT_TRUE(r.exact);
}

TEST(Oracle, Examples) {
  EXPECT_NEAR(exact_hitting_times(two_state_chain(0.125)).expected_hitting[1], 8.0, 1e-12);
  for (int n : {3, 10, 20})
    EXPECT_NEAR(exact_hitting_times(coupon_collector_chain(n)).expected_hitting[n],
                n * harmonic(n), 1e-9);
  const auto d = exact_hitting_times(deterministic_chain(9));
  EXPECT_NEAR(d.expected_hitting[9], 9.0, 1e-12);
  EXPECT_EQ(d.expected_hitting[0], 0.0);
  EXPECT_EQ(d.method, OracleMethod::tridiagonal);
  EXPECT_LT(d.residual, 1e-9);
}

TEST(Oracle, DenseAgreesWithTridiagonal) {
  auto c = gamblers_ruin(0.03, 5, 60);
  const auto tri = exact_hitting_times(c);
  c.structure = ChainStructure::general;
  const auto dense = exact_hitting_times(c);
  EXPECT_EQ(dense.method, OracleMethod::dense_elimination);
  for (std::size_t i = 0; i < c.size(); ++i)
    EXPECT_NEAR(dense.expected_hitting[i], tri.expected_hitting[i],
                1e-9 * tri.expected_hitting[i] + 1e-12);
}

TEST(Oracle, Errors) {
  const auto stuck = chain_from_transitions({{0, 0, 1.0}, {1, 1, 1.0}, {2, 0, 1.0}});
  EXPECT_THROW(exact_hitting_times(stuck), NoFiniteHittingTime);
  std::vector<std::tuple<double, double, double>> tr{{0, 0, 1.0}};
  for (int s = 2; s <= 10001; ++s) tr.emplace_back(s, 0, 1.0);
  const auto big = chain_from_transitions(tr);
  ASSERT_EQ(big.structure, ChainStructure::general);
  EXPECT_THROW(exact_hitting_times(big), SizeError);
}

TEST(Oracle, MonteCarloAgreementOnSuiteChains) {
  for (const auto& c : {coupon_collector_chain(10), gamblers_ruin(0.05, 3, 100),
                        random_decline_chain(2.0, 30, 100), weak_drift_walk(2, 20)}) {
    const double exact = exact_hitting_times(c).expected_hitting[c.start];
    const auto st = estimate_hitting_time(chain_as_process(c), 10000, kDefaultMaxSteps, 9);
    EXPECT_NEAR(st.mean, exact, 3 * st.std_error());
  }
}

TEST(Mgf, Examples) {
  auto p = chain_as_process(deterministic_chain(10));
  const auto pot = native_potential(p);
  const auto m = estimate_mgf_beta(p, pot, 0.7, 5, 1);
  for (const auto& [s, b] : m.buckets) EXPECT_NEAR(b.mean(), std::exp(-0.7), 1e-15);
  const auto z = estimate_mgf_beta(p, pot, 0.0, 5, 1);
  for (const auto& [s, b] : z.buckets) EXPECT_EQ(b.mean(), 1.0);
  EXPECT_EQ(z.max_beta, 1.0);
}

TEST(Mgf, ClipsHugeExponents) {
  auto c = chain_from_transitions({{0, 0, 1.0}, {1, 0, 0.5}, {1, 5000, 0.5}, {5000, 0, 1.0}});
  auto p = chain_as_process(c, 1);
  const auto m = estimate_mgf_beta(p, native_potential(p), 1.0, 200, 1);
  EXPECT_GT(m.clipped, 0u);
  EXPECT_TRUE(std::isfinite(m.max_beta));
}

TEST(JumpProfile, UnitSteps) {
  const auto table = exact_drift(gamblers_ruin(0.1, 1, 30));
  for (double eta : {0.1, 1.0, 10.0}) EXPECT_NEAR(fit_jump_r(table, eta), 1.0, 1e-12);
  EXPECT_EQ(table.tail_gt(1), 0.0);
}

TEST(JumpProfile, LeadingOnesGeometricJumps) {
  EAConfig cfg;
  cfg.n = 30;
  RlsProcess p(Fitness::leading_ones(), cfg);
  const auto table = estimate_drift(p, translated_potential(native_potential(p)), 500, 10);
  for (std::uint64_t j = 1; j < 30; ++j)
    EXPECT_LE(table.tail_ge(j), 2.0 * std::pow(2.0, -static_cast<double>(j))) << j;
  const auto prof = jump_tail_profile(table, 2.0 / 30, 31, 15);
  EXPECT_GT(prof.eta, 0.0);
  EXPECT_LE(prof.bound, 1.0);
  for (std::uint64_t j = 0; j < 30; ++j)
    EXPECT_LE(table.tail_gt(j),
              prof.jump_r * std::pow(1 + prof.eta, -static_cast<double>(j)) * (1 + 1e-12));
}

}  // namespace
