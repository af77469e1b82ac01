#include <gtest/gtest.h>

#include <random>

#include "copulacd/error.hpp"
#include "copulacd/metrics.hpp"

using namespace copulacd;

TEST(Confusion, PerfectPrediction) {
  ChangeMap truth(10, 10, 0);
  for (int i = 0; i < 30; ++i) truth.labels[i * 3] = 1;
  EXPECT_EQ(confusion(truth, truth), (ConfusionCounts{30, 70, 0, 0}));
}

TEST(Confusion, AllFalseAlarms) {
  EXPECT_EQ(confusion(ChangeMap(5, 2, 1), ChangeMap(5, 2, 0)), (ConfusionCounts{0, 0, 10, 0}));
}

TEST(Confusion, MatchesBruteForceAndSwapSymmetry) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    ChangeMap p(13, 11), t(13, 11);
    for (auto& x : p.labels) x = rng() % 3 == 0;
    for (auto& x : t.labels) x = rng() % 4 == 0;
    ConfusionCounts ref;
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
      if (p.labels[i] && t.labels[i]) ++ref.tp;
      if (!p.labels[i] && !t.labels[i]) ++ref.tn;
      if (p.labels[i] && !t.labels[i]) ++ref.fp;
      if (!p.labels[i] && t.labels[i]) ++ref.fn;
    }
    EXPECT_EQ(confusion(p, t), ref);
    const ConfusionCounts sw = confusion(t, p);
    EXPECT_EQ(sw.fp, ref.fn);
    EXPECT_EQ(sw.fn, ref.fp);
    EXPECT_EQ(compute_metrics(sw).pcc, compute_metrics(ref).pcc);
  }
  EXPECT_THROW(confusion(ChangeMap(2, 2), ChangeMap(2, 3)), DataError);
}

TEST(ComputeMetrics, OverallErrorFromPublishedRow) {
  const MetricsReport r = compute_metrics(ConfusionCounts{1000, 2000, 65972, 37711});
  EXPECT_EQ(r.oe, 103683u);
}

TEST(ComputeMetrics, HandCase) {
  const MetricsReport r = compute_metrics(ConfusionCounts{40, 40, 10, 10});
  EXPECT_NEAR(r.pcc, 0.8, 1e-12);
  EXPECT_NEAR(r.pre, 0.5, 1e-12);
  EXPECT_NEAR(r.kc, 0.6, 1e-12);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(ComputeMetrics, PerfectAndOrdering) {
  const MetricsReport r = compute_metrics(ConfusionCounts{12, 88, 0, 0});
  EXPECT_EQ(r.pcc, 1.0);
  EXPECT_EQ(r.kc, 1.0);
  std::mt19937 rng(9);
  for (int i = 0; i < 200; ++i) {
    const ConfusionCounts c{rng() % 50, rng() % 50, rng() % 50, rng() % 50};
    if (c.total() == 0) continue;
    const MetricsReport m = compute_metrics(c);
    EXPECT_EQ(m.oe, c.fp + c.fn);
    EXPECT_LE(m.kc, m.pcc + 1e-15);
    EXPECT_LE(m.pcc, 1.0);
    if (c.fp == 0 && c.fn == 0) {
      EXPECT_EQ(m.kc, 1.0);
    } else {
      EXPECT_LT(m.kc, 1.0);
    }
  }
}

TEST(ComputeMetrics, DegenerateKappa) {
  const MetricsReport perfect = compute_metrics(ConfusionCounts{0, 50, 0, 0});
  EXPECT_EQ(perfect.kc, 1.0);
  ASSERT_EQ(perfect.warnings.size(), 1u);
  const MetricsReport all_changed = compute_metrics(ConfusionCounts{7, 0, 0, 0});
  EXPECT_EQ(all_changed.kc, 1.0);
  EXPECT_FALSE(all_changed.warnings.empty());
  EXPECT_THROW(compute_metrics(ConfusionCounts{}), DataError);
}

TEST(MetricsJson, RoundTripAndKeys) {
  MetricsReport r = compute_metrics(ConfusionCounts{40, 40, 10, 10});
  r.warnings.push_back("note");
  const std::string text = to_json(r);
  for (const char* key : {"\"tp\"", "\"tn\"", "\"fp\"", "\"fn\"", "\"oe\"", "\"pcc\"", "\"kc\"", "\"warnings\""})
    EXPECT_NE(text.find(key), std::string::npos) << key;
  const MetricsReport back = metrics_from_json(text);
  EXPECT_EQ(back.counts, r.counts);
  EXPECT_EQ(back.oe, r.oe);
  EXPECT_EQ(back.pcc, r.pcc);
  EXPECT_EQ(back.kc, r.kc);
  EXPECT_EQ(back.warnings, r.warnings);
  EXPECT_THROW(metrics_from_json("{not json"), DataError);
  EXPECT_THROW(metrics_from_json("{\"tp\": 1}"), DataError);
}
