#include <gtest/gtest.h>

#include <cmath>

#include "coinflow/exact.hpp"
#include "coinflow/simulation.hpp"
#include "coinflow/stats.hpp"
#include "test_util.hpp"

using namespace coinflow;

TEST(Histogram, AccumulateExample) {
  Histogram h({-2, 5});
  accumulate(h, MoneyState{{3, 3, 2, 2}, std::nullopt});
  EXPECT_EQ(h.total(), 4u);
  EXPECT_EQ(h.count(3), 2u);
  EXPECT_EQ(h.count(2), 2u);
  EXPECT_EQ(h.count(0), 0u);
  EXPECT_EQ(h.count(100), 0u);
  EXPECT_DOUBLE_EQ(h.frequency(3), 0.5);
  accumulate(h, MoneyState{{-2, 5, 4, 3}, std::nullopt});
  EXPECT_EQ(h.total(), 8u);
  EXPECT_DOUBLE_EQ(h.normalized().total(), 1.0);
}

TEST(Histogram, OutOfWindowIsCorruption) {
  Histogram h({0, 3});
  EXPECT_ERROR(h.add(4), corrupted_state);
  EXPECT_ERROR(h.add(-1), corrupted_state);
}

TEST(Histogram, MergeUnionsWindows) {
  Histogram a({0, 3}), b({-2, 1});
  a.add(3, 4);
  b.add(-2, 2);
  b.add(1);
  a.merge(b);
  EXPECT_EQ(a.window(), (SupportWindow{-2, 3}));
  EXPECT_EQ(a.total(), 7u);
  EXPECT_EQ(a.count(3), 4u);
  EXPECT_EQ(a.count(-2), 2u);
  EXPECT_EQ(a.count(1), 1u);
}

TEST(TotalVariation, Examples) {
  const DensePmf p{0, {0.5, 0.5}};
  EXPECT_DOUBLE_EQ(tv_distance(p, p), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(DensePmf{0, {1.0}}, DensePmf{5, {1.0}}), 1.0);
  EXPECT_DOUBLE_EQ(tv_distance(DensePmf{0, {1.0}}, p), 0.5);
  EXPECT_DOUBLE_EQ(tv_distance(DensePmf{-1, {0.25, 0.75}}, DensePmf{0, {0.75, 0.25}}), 0.25);
}

TEST(ChiSquare, ExactFrequenciesGiveZero) {
  Histogram h({0, 3});
  for (Balance c = 0; c <= 3; ++c) h.add(c, 250);
  const auto r = chi_square(h, DensePmf{0, {0.25, 0.25, 0.25, 0.25}});
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.dof, 3u);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(ChiSquare, DetectsWrongModel) {
  Histogram h({0, 1});
  h.add(0, 700);
  h.add(1, 300);
  const auto r = chi_square(h, DensePmf{0, {0.5, 0.5}});
  EXPECT_DOUBLE_EQ(r.statistic, 160.0);
  EXPECT_LT(r.p_value, 1e-30);
  Histogram outside({0, 2});
  outside.add(2);
  EXPECT_EQ(chi_square(outside, DensePmf{0, {0.5, 0.5}}).p_value, 0.0);
}

TEST(Symmetry, SymmetricTallyIsZero) {
  InteractionTally t;
  for (std::size_t i = 0; i < InteractionType::kCount; ++i)
    for (int k = 0; k < 10; ++k) t.record(InteractionType::from_index(i));
  const auto r = interaction_symmetry(t);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.max_z, 0.0);
  EXPECT_FALSE(r.significant);
}

TEST(Symmetry, ThreeToOneExample) {
  InteractionTally t;
  const InteractionType pn{Sign::positive, Sign::negative};
  for (int k = 0; k < 3; ++k) t.record(pn);
  t.record(pn.swapped());
  for (int k = 0; k < 6; ++k) t.record({Sign::zero, Sign::zero});
  const auto r = interaction_symmetry(t);
  EXPECT_NEAR(r.statistic, 0.2, 1e-15);
  EXPECT_TRUE(r.worst_pair == pn || r.worst_pair == pn.swapped());
  EXPECT_NEAR(t.proportion(pn), 0.3, 1e-15);
}

TEST(Symmetry, LargeImbalanceIsSignificant) {
  InteractionTally t;
  const InteractionType zp{Sign::zero, Sign::positive};
  for (int k = 0; k < 6000; ++k) t.record(zp);
  for (int k = 0; k < 4000; ++k) t.record(zp.swapped());
  EXPECT_TRUE(interaction_symmetry(t).significant);
}

TEST(Drift, NeedsTwoPositiveBankBatches) {
  EXPECT_ERROR(drift_estimate(std::vector<DriftBatch>{}), insufficient_data);
  EXPECT_ERROR(drift_estimate(std::vector<DriftBatch>{{0, 0, 0}, {10, -1, 1}}), insufficient_data);
}

TEST(Drift, HandBatches) {
  const std::vector<DriftBatch> batches{{100, -2, 2}, {100, -4, 4}, {0, 0, 0}};
  const auto e = drift_estimate(batches);
  EXPECT_DOUBLE_EQ(e.mean_increment, -0.03);
  EXPECT_DOUBLE_EQ(e.zero_prob, 0.03);
  EXPECT_DOUBLE_EQ(e.identity_gap, 0.0);
  EXPECT_EQ(e.batches, 2u);
  EXPECT_EQ(e.sample_count, 200u);
  // Two ratios 0.02 and 0.04: sd = sqrt(2) * 0.01.
  EXPECT_NEAR(e.ci_halfwidth, 1.959963984540054 * 0.01, 1e-12);
  EXPECT_TRUE(e.negative_with_confidence());
  EXPECT_TRUE(e.matches_zero_prob());
}

TEST(BankCurve, ScalesByInitialStock) {
  BankTrace t{10, {{0, 10.0}, {50, 5.0}, {100, 2.0}}, 30.0L, 10};
  const auto c = bank_depletion_curve(t);
  ASSERT_EQ(c.series.size(), 3u);
  EXPECT_DOUBLE_EQ(c.series[0].second, 1.0);
  EXPECT_DOUBLE_EQ(c.series[1].second, 0.5);
  EXPECT_DOUBLE_EQ(c.late_average, 0.3);
}

TEST(BankCurve, EmptyStockGivesZeros) {
  BankTrace t{0, {{0, 0.0}, {10, 0.0}}, 0.0L, 5};
  const auto c = bank_depletion_curve(t);
  for (const auto& [step, v] : c.series) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(c.late_average, 0.0);
}

TEST(Simulated, MergedReplicasMatchSummedHistogram) {
  const auto g = GraphTopology::build_named(NamedGraph::complete, 6);
  const ModelParams p{ModelKind::collective, 12, 4};
  SimulationConfig cfg;
  cfg.seed = 5;
  cfg.burn_in = 1000;
  cfg.samples = 2000;
  const auto merged = simulate_replicas(g, p, cfg, 3, 1);
  Histogram sum(support(p, 6));
  for (unsigned r = 0; r < 3; ++r) sum.merge(simulate(g, p, cfg, r).histogram);
  EXPECT_EQ(merged.histogram.counts(), sum.counts());
  EXPECT_EQ(merged.histogram.total(), 3u * 2000 * 6);
}

TEST(Simulated, TvShrinksWithSampleSize) {
  const auto g = GraphTopology::build_named(NamedGraph::cycle, 5);
  const ModelParams p{ModelKind::individual, 10, 2};
  const auto exact = marginal_individual(5, 10, 2).to_dense();
  std::vector<double> tv;
  for (std::uint64_t samples : {1000ULL, 100000ULL}) {
    SimulationConfig cfg;
    cfg.seed = 99;
    cfg.burn_in = 10000;
    cfg.samples = samples;
    cfg.thinning = 5;
    tv.push_back(tv_distance(simulate(g, p, cfg).histogram.normalized(), exact));
  }
  EXPECT_LT(tv[1], tv[0]);
  EXPECT_LT(tv[1], 0.01);
}
