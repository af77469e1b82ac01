#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "copulacd/clustering.hpp"
#include "copulacd/error.hpp"

using namespace copulacd;

TEST(NegativeLogScores, HandValues) {
  const std::vector<double> pdf{1.0, 1e-9, 10.0, 0.5};
  const auto s = negative_log_scores(pdf);
  EXPECT_EQ(s[0], 0.0);
  EXPECT_NEAR(s[1], 9.0, 1e-12);
  EXPECT_NEAR(s[2], -1.0, 1e-15);
  EXPECT_GT(s[3], s[0]);
  EXPECT_LT(s[2], s[0]);
  EXPECT_THROW(negative_log_scores(std::vector<double>{0.0}), DataError);
  EXPECT_THROW(negative_log_scores(std::vector<double>{-1.0}), DataError);
}

TEST(Fcm, TwoTightClustersConvergeToTheirValues) {
  const std::vector<double> s{0, 0, 0, 10, 10, 10};
  const FcmResult r = fcm_two_class(s);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 50);
  EXPECT_NEAR(r.centers[0], 0.0, 1e-6);
  EXPECT_NEAR(r.centers[1], 10.0, 1e-6);
  EXPECT_EQ(r.labels, (std::vector<std::uint8_t>{0, 0, 0, 1, 1, 1}));
}

TEST(Fcm, BinaryScoresLowIsUnchanged) {
  const std::vector<double> s{7.5, -2, 7.5, -2, -2};
  const FcmResult r = fcm_two_class(s);
  EXPECT_EQ(r.labels, (std::vector<std::uint8_t>{1, 0, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(r.memberships[0][1], 1.0);
}

TEST(Fcm, MembershipsNormalizedAndObjectiveNonincreasing) {
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(5 + rng() % 200);
    for (auto& x : s) x = (rng() % 4 == 0 ? 6.0 : 0.0) + nd(rng) * (0.5 + trial % 3);
    const FcmResult r = fcm_two_class(s, FcmOptions{2.0, 1e-6, 300, static_cast<std::uint64_t>(trial)});
    for (const auto& m : r.memberships) EXPECT_NEAR(m[0] + m[1], 1.0, 1e-12);
    ASSERT_EQ(r.objective.size(), static_cast<std::size_t>(r.iterations));
    for (std::size_t i = 1; i < r.objective.size(); ++i)
      EXPECT_LE(r.objective[i], r.objective[i - 1] * (1 + 1e-12) + 1e-12);
    EXPECT_LE(r.centers[0], r.centers[1]);
    // Refreshing memberships for the final centers can only lower the objective.
    EXPECT_LE(fcm_objective(s, r.memberships, r.centers, 2.0), r.objective.back() * (1 + 1e-12) + 1e-12);
  }
}

TEST(Fcm, LabelsInvariantUnderAffineRescaling) {
  std::mt19937 rng(8);
  std::normal_distribution<double> nd;
  std::vector<double> s(150);
  for (auto& x : s) x = (rng() % 3 == 0 ? 4.0 : 0.0) + nd(rng);
  std::vector<double> t(s.size());
  std::transform(s.begin(), s.end(), t.begin(), [](double x) { return 3.5 * x - 20.0; });
  const FcmResult a = fcm_two_class(s);
  const FcmResult b = fcm_two_class(t);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NEAR(b.centers[0], 3.5 * a.centers[0] - 20.0, 1e-4);
  EXPECT_NEAR(b.centers[1], 3.5 * a.centers[1] - 20.0, 1e-4);
}

TEST(Fcm, DeterministicAndDegenerate) {
  std::vector<double> s{1, 2, 2, 2, 9, 9.5, 1, 1, 1};
  const FcmResult a = fcm_two_class(s, FcmOptions{2.0, 1e-6, 300, 4});
  const FcmResult b = fcm_two_class(s, FcmOptions{2.0, 1e-6, 300, 4});
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.centers, b.centers);
  EXPECT_THROW(fcm_two_class(std::vector<double>{3, 3, 3}), DataError);
  EXPECT_THROW(fcm_two_class(std::vector<double>{}), DataError);
}

TEST(Fcm, TiedPercentilesStillSeparate) {
  // Quartiles coincide, so the initial centers need the seeded nudge.
  std::vector<double> s(40, 1.0);
  s[0] = 5.0;
  const FcmResult r = fcm_two_class(s);
  EXPECT_EQ(r.labels[0], 1);
  EXPECT_EQ(std::count(r.labels.begin(), r.labels.end(), 1), 1);
}

TEST(Fcm, OptionValidation) {
  EXPECT_THROW((FcmOptions{1.0, 1e-6, 300, 0}.validate()), UsageError);
  EXPECT_THROW((FcmOptions{2.0, 0.0, 300, 0}.validate()), UsageError);
  EXPECT_THROW((FcmOptions{2.0, 1e-6, 0, 0}.validate()), UsageError);
}

TEST(LabelsToMask, PaintsSuperpixels) {
  SuperpixelMap m;
  m.width = 4;
  m.height = 2;
  m.count = 3;
  m.label = {0, 0, 1, 1, 2, 2, 2, 1};
  EXPECT_EQ(labels_to_mask(m, std::vector<std::uint8_t>{1, 1, 1}), ChangeMap(4, 2, 1));
  const ChangeMap one = labels_to_mask(m, std::vector<std::uint8_t>{0, 0, 1});
  EXPECT_EQ(one.changed_count(), m.sizes()[2]);
  EXPECT_THROW(labels_to_mask(m, std::vector<std::uint8_t>{0, 1}), DataError);
}

TEST(LabelsToMask, OnePixelSuperpixelsAreIdentity) {
  SuperpixelMap m;
  m.width = 5;
  m.height = 3;
  m.count = 15;
  for (int i = 0; i < 15; ++i) m.label.push_back(i);
  std::vector<std::uint8_t> labels(15);
  std::mt19937 rng(1);
  for (auto& l : labels) l = rng() & 1u;
  EXPECT_EQ(labels_to_mask(m, labels).labels, labels);
}
