#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "copulacd/classical_copulas.hpp"
#include "copulacd/error.hpp"
#include "copulacd/synthgen.hpp"

using namespace copulacd;

namespace {

std::vector<double> as_doubles(const RasterImage& img) { return {img.data.begin(), img.data.end()}; }

// Kolmogorov distance between the image histogram and the rounded/clipped marginal.
double ks_distance(const RasterImage& img, const MarginalSpec& m) {
  std::array<double, 256> hist{};
  for (auto x : img.data) hist[x] += 1.0;
  double acc = 0.0, worst = 0.0;
  for (int k = 0; k < 256; ++k) {
    acc += hist[k] / static_cast<double>(img.data.size());
    const double target = k == 255 ? 1.0 : m.cdf(k + 0.5);
    worst = std::max(worst, std::abs(acc - target));
  }
  return worst;
}

SynthSpec base_spec() {
  SynthSpec s;
  s.width = 160;
  s.height = 128;
  s.seed = 5;
  return s;
}

}  // namespace

TEST(Synthgen, UnchangedPairsCarryTheRequestedTau) {
  SynthSpec s = base_spec();
  s.dependence = CopulaFamily::gaussian(0.9);
  const SynthScene scene = generate(s);
  EXPECT_EQ(scene.truth.changed_count(), 0u);
  const double tau = kendall_tau(as_doubles(scene.pair.pre()), as_doubles(scene.pair.post()));
  EXPECT_NEAR(tau, 2.0 / std::numbers::pi * std::asin(0.9), 0.05);
}

TEST(Synthgen, FullChangeIsIndependent) {
  SynthSpec s = base_spec();
  s.change_regions = {PixelRect{0, 0, s.width, s.height}};
  const SynthScene scene = generate(s);
  EXPECT_EQ(scene.truth.changed_count(), static_cast<std::size_t>(s.width) * s.height);
  EXPECT_LT(std::abs(kendall_tau(as_doubles(scene.pair.pre()), as_doubles(scene.pair.post()))), 0.05);
}

TEST(Synthgen, SameSeedSameScene) {
  SynthSpec s = base_spec();
  s.change_regions = {PixelRect{10, 10, 50, 40}};
  s.noise_sigma = 3.0;
  const SynthScene a = generate(s);
  const SynthScene b = generate(s);
  EXPECT_EQ(a.pair.pre(), b.pair.pre());
  EXPECT_EQ(a.pair.post(), b.pair.post());
  EXPECT_EQ(a.truth, b.truth);
  s.seed = 6;
  EXPECT_NE(generate(s).pair.pre(), a.pair.pre());
}

TEST(Synthgen, MaskIsUnionOfRectangles) {
  SynthSpec s = base_spec();
  s.change_regions = {PixelRect{10, 10, 50, 40}, PixelRect{30, 20, 70, 60}, PixelRect{100, 0, 160, 5}};
  const SynthScene scene = generate(s);
  std::size_t expected = 0;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      bool inside = false;
      for (const auto& r : s.change_regions) inside = inside || r.contains(x, y);
      expected += inside;
      EXPECT_EQ(scene.truth.labels[static_cast<std::size_t>(y) * s.width + x], inside ? 1 : 0);
    }
  EXPECT_EQ(scene.truth.changed_count(), expected);
}

TEST(Synthgen, MarginalsMatchRequested) {
  for (bool blur : {false, true}) {
    SynthSpec s = base_spec();
    s.blur = blur;
    s.marginal_pre = MarginalSpec::gamma(4.0, 20.0);
    s.marginal_post = MarginalSpec::uniform(30.0, 220.0);
    s.change_regions = {PixelRect{0, 0, 80, 128}};
    const SynthScene scene = generate(s);
    EXPECT_LT(ks_distance(scene.pair.pre(), s.marginal_pre), 0.05);
    EXPECT_LT(ks_distance(scene.pair.post(), s.marginal_post), 0.05);
  }
}

TEST(Synthgen, ChangeMarginalAppliesInsideRegionsOnly) {
  SynthSpec s = base_spec();
  s.change_regions = {PixelRect{0, 0, 80, 128}};
  s.change_marginal_post = MarginalSpec::normal(30.0, 10.0);
  s.blur = false;
  const SynthScene scene = generate(s);
  double inside = 0, outside = 0;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) (x < 80 ? inside : outside) += scene.pair.post().at(x, y);
  EXPECT_NEAR(inside / (80.0 * 128), 30.0, 1.0);
  EXPECT_NEAR(outside / (80.0 * 128), 120.0, 1.5);
}

TEST(Synthgen, BlurMakesNeighborsCorrelated) {
  SynthSpec s = base_spec();
  const SynthScene scene = generate(s);
  std::vector<double> a, b;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x + 1 < s.width; ++x) {
      a.push_back(scene.pair.pre().at(x, y));
      b.push_back(scene.pair.pre().at(x + 1, y));
    }
  EXPECT_GT(kendall_tau(a, b), 0.3);
}

TEST(Synthgen, RejectsBadSpecs) {
  SynthSpec s = base_spec();
  s.change_regions = {PixelRect{0, 0, 200, 10}};
  EXPECT_THROW(generate(s), UsageError);
  s = base_spec();
  s.width = 0;
  EXPECT_THROW(generate(s), UsageError);
  s = base_spec();
  s.marginal_pre = MarginalSpec::normal(100, 0);
  EXPECT_THROW(generate(s), UsageError);
}

TEST(MarginalSpec, ParseAndFormat) {
  EXPECT_EQ(MarginalSpec::parse("normal(120,30)"), MarginalSpec::normal(120, 30));
  EXPECT_EQ(MarginalSpec::parse(" uniform( 0 , 255 ) "), MarginalSpec::uniform(0, 255));
  EXPECT_EQ(MarginalSpec::parse("gamma(2,20)"), MarginalSpec::gamma(2, 20));
  for (const auto& m : {MarginalSpec::normal(1.5, 2.25), MarginalSpec::gamma(0.5, 3.0)})
    EXPECT_EQ(MarginalSpec::parse(m.to_string()), m);
  EXPECT_THROW(MarginalSpec::parse("lognormal(1,2)"), UsageError);
  EXPECT_THROW(MarginalSpec::parse("normal(1)"), UsageError);
  EXPECT_NEAR(MarginalSpec::normal(10, 2).quantile(0.5), 10.0, 1e-12);
  EXPECT_NEAR(MarginalSpec::uniform(0, 4).cdf(1.0), 0.25, 1e-15);
}
