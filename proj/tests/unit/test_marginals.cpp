#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "copulacd/error.hpp"
#include "copulacd/marginals.hpp"

using namespace copulacd;

namespace {

double phi_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

// Direct Gaussian-kernel CDF with the bandwidth recomputed from scratch.
double oracle_kde(const std::vector<std::uint8_t>& s, double x) {
  double mean = 0.0;
  for (auto v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (auto v : s) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(s.size() - 1));
  const double h = 1.06 * sd / std::pow(static_cast<double>(s.size()), 0.2);
  double acc = 0.0;
  for (auto v : s) acc += phi_cdf((x - v) / h);
  return acc / static_cast<double>(s.size());
}

std::vector<std::uint8_t> normal_samples(std::size_t n, double mean, double sd, std::uint32_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(mean, sd);
  std::vector<std::uint8_t> out(n);
  for (auto& x : out) x = static_cast<std::uint8_t>(std::clamp(std::lround(d(rng)), 0L, 255L));
  return out;
}

}  // namespace

TEST(KdeCdf, UniformSpreadIsRoughlyLinear) {
  std::vector<std::uint8_t> s;
  for (int rep = 0; rep < 4; ++rep)
    for (int k = 0; k < 256; ++k) s.push_back(static_cast<std::uint8_t>(k));
  const CdfTable t = fit_kde_cdf(s);
  EXPECT_NEAR(t.entries[127], 0.5, 0.05);
  for (int k = 0; k < 256; ++k) EXPECT_NEAR(t.entries[k], std::max(kCdfFloor, oracle_kde(s, k)), 1e-12);
  for (int k = 32; k < 224; k += 16) EXPECT_NEAR(t.entries[k], (k + 0.5) / 256.0, 0.02);
}

TEST(KdeCdf, TwoExtremeSamplesAreSymmetric) {
  const std::vector<std::uint8_t> s{0, 255};
  const CdfTable t = fit_kde_cdf(s);
  EXPECT_GT(t.entries[0], 0.2);
  EXPECT_LT(t.entries[0], 0.35);
  for (int k = 0; k < 256; ++k) EXPECT_NEAR(t.entries[k] + t.entries[255 - k], 1.0, 1e-6);
}

TEST(KdeCdf, MonotoneAndBoundedForRandomSamples) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> s(2 + rng() % 300);
    for (auto& x : s) x = static_cast<std::uint8_t>(rng());
    if (std::all_of(s.begin(), s.end(), [&](auto v) { return v == s[0]; })) continue;
    const CdfTable t = fit_kde_cdf(s);
    for (int k = 0; k < 256; ++k) {
      EXPECT_GE(t.entries[k], kCdfFloor);
      EXPECT_LE(t.entries[k], 1.0);
      if (k > 0) EXPECT_GE(t.entries[k], t.entries[k - 1]);
    }
  }
}

TEST(KdeCdf, UpperEntryNearOneForInteriorSamples) {
  const CdfTable t = fit_kde_cdf(normal_samples(2000, 100.0, 20.0, 2));
  EXPECT_GE(t.entries[255], 1.0 - 1e-6);
  EXPECT_LT(t.entries[0], 1e-5);
}

TEST(KdeCdf, ConvergesToTrueNormalCdf) {
  const auto s = normal_samples(3000, 120.0, 30.0, 9);
  const CdfTable t = fit_kde_cdf(s);
  double worst = 0.0;
  for (int k = 0; k < 256; ++k) worst = std::max(worst, std::abs(t.entries[k] - phi_cdf((k + 0.5 - 120.0) / 30.0)));
  EXPECT_LT(worst, 0.05);
}

TEST(KdeCdf, BandwidthFollowsSilverman) {
  const auto s = normal_samples(500, 90.0, 15.0, 4);
  const CdfTable t = fit_kde_cdf(s);
  EXPECT_EQ(t.sample_count, 500u);
  EXPECT_DOUBLE_EQ(t.bandwidth, silverman_bandwidth(s));
  const CdfTable wide = fit_kde_cdf(s, KdeOptions{2.0});
  EXPECT_DOUBLE_EQ(wide.bandwidth, 2.0 * t.bandwidth);
}

TEST(KdeCdf, DegenerateSamplesThrow) {
  EXPECT_THROW(fit_kde_cdf(std::vector<std::uint8_t>(10, 7)), DataError);
  EXPECT_THROW(fit_kde_cdf(std::vector<std::uint8_t>{3}), DataError);
  EXPECT_THROW(fit_kde_cdf(std::vector<std::uint8_t>{3, 4}, KdeOptions{0.0}), UsageError);
}

TEST(Pit, LookupMatchesPerPointKde) {
  const auto s = normal_samples(400, 140.0, 25.0, 1);
  const CdfTable t = fit_kde_cdf(s);
  std::vector<std::uint8_t> f{0, 17, 90, 140, 141, 200, 255};
  const auto u = pit(f, t);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_EQ(u[i], std::clamp(kde_cdf_at(s, t.bandwidth, f[i]), kCdfFloor, 1.0));
}

TEST(Pit, TopLevelAndTiesAndOrder) {
  const CdfTable t = fit_kde_cdf(normal_samples(300, 60.0, 10.0, 3));
  const std::vector<std::uint8_t> f{255, 40, 40, 80, 10};
  const auto u = pit(f, t);
  EXPECT_GE(u[0], 1.0 - 1e-6);
  EXPECT_EQ(u[1], u[2]);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = 0; j < f.size(); ++j)
      if (f[i] < f[j]) EXPECT_LE(u[i], u[j]);
}

TEST(EmpiricalJointCdf, HandCounts) {
  const std::vector<std::uint8_t> g1{1, 2, 3};
  const std::vector<std::uint8_t> g2{1, 2, 3};
  EXPECT_EQ(empirical_joint_cdf(g1, g2, 255, 255), 1.0);
  EXPECT_EQ(empirical_joint_cdf(g1, g2, -1, -1), 0.0);
  EXPECT_EQ(empirical_joint_cdf(g1, g2, 0, 255), 0.0);
  EXPECT_DOUBLE_EQ(empirical_joint_cdf(g1, g2, 2, 2), 2.0 / 3.0);
}

TEST(EmpiricalJointCdf, CoordinatewiseMonotone) {
  const auto g1 = normal_samples(200, 100.0, 40.0, 5);
  const auto g2 = normal_samples(200, 150.0, 30.0, 6);
  for (int x = 0; x < 256; x += 5)
    for (int y = 0; y < 256; y += 5) {
      const double f = empirical_joint_cdf(g1, g2, x, y);
      EXPECT_LE(f, empirical_joint_cdf(g1, g2, x + 5, y));
      EXPECT_LE(f, empirical_joint_cdf(g1, g2, x, y + 5));
    }
}

TEST(EmpiricalJointCdf, RejectsEmptyOrUnpaired) {
  EXPECT_THROW(empirical_joint_cdf({}, {}, 1, 1), DataError);
  const std::vector<std::uint8_t> a{1, 2};
  const std::vector<std::uint8_t> b{1};
  EXPECT_THROW(empirical_joint_cdf(a, b, 1, 1), DataError);
}
