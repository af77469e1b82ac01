#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>

#include "copulacd/error.hpp"
#include "copulacd/segmentation.hpp"

using namespace copulacd;

namespace {

RasterImage random_image(int w, int h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  RasterImage img(w, h, 1, std::uint8_t{0});
  for (auto& x : img.data) x = static_cast<std::uint8_t>(rng());
  return img;
}

// Two flat halves plus noise so SLIC has real edges to follow.
BiTemporalPair blocky_pair(int w, int h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 6.0);
  RasterImage a(w, h, 1, std::uint8_t{0});
  RasterImage b(w, h, 1, std::uint8_t{0});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double base = (x < w / 2) ? 60.0 : 180.0;
      const double post = (y < h / 3) ? 200.0 : 90.0;
      a.at(x, y) = static_cast<std::uint8_t>(std::clamp(base + noise(rng), 0.0, 255.0));
      b.at(x, y) = static_cast<std::uint8_t>(std::clamp(post + noise(rng), 0.0, 255.0));
    }
  return BiTemporalPair(a, b);
}

bool all_connected(const SuperpixelMap& m) {
  std::vector<char> seen(m.label.size(), 0);
  std::vector<int> components(m.count, 0);
  for (std::size_t start = 0; start < m.label.size(); ++start) {
    if (seen[start]) continue;
    const int id = m.label[start];
    ++components[id];
    std::queue<std::size_t> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const std::size_t p = q.front();
      q.pop();
      const int x = static_cast<int>(p % m.width);
      const int y = static_cast<int>(p / m.width);
      const int dx[] = {1, -1, 0, 0};
      const int dy[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k];
        const int ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
        const std::size_t q2 = static_cast<std::size_t>(ny) * m.width + nx;
        if (!seen[q2] && m.label[q2] == id) {
          seen[q2] = 1;
          q.push(q2);
        }
      }
    }
  }
  return std::all_of(components.begin(), components.end(), [](int c) { return c == 1; });
}

SuperpixelMap grid_map(int w, int h, int cell) {
  SuperpixelMap m;
  m.width = w;
  m.height = h;
  const int cols = (w + cell - 1) / cell;
  const int rows = (h + cell - 1) / cell;
  m.count = cols * rows;
  m.label.resize(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.label[static_cast<std::size_t>(y) * w + x] = (y / cell) * cols + x / cell;
  return m;
}

}  // namespace

TEST(CoSlic, UniformPairSplitsIntoFourEqualRegions) {
  const BiTemporalPair pair(RasterImage(100, 100, 1, std::uint8_t{128}), RasterImage(100, 100, 1, std::uint8_t{40}));
  const SuperpixelMap m = co_slic(pair, 4, 10.0, 0);
  ASSERT_EQ(m.count, 4);
  EXPECT_TRUE(all_connected(m));
  for (std::size_t s : m.sizes()) EXPECT_NEAR(static_cast<double>(s), 2500.0, 250.0);
}

TEST(CoSlic, PartitionCoversEveryPixelOnce) {
  for (int n : {10, 57, 300}) {
    const BiTemporalPair pair(random_image(73, 41, n), random_image(73, 41, n + 1));
    const SuperpixelMap m = co_slic(pair, n, 10.0, 7);
    EXPECT_NO_THROW(m.validate());
    const auto sizes = m.sizes();
    EXPECT_EQ(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}), 73u * 41u);
    std::vector<std::size_t> counted(m.count, 0);
    for (int l : m.label) {
      ASSERT_GE(l, 0);
      ASSERT_LT(l, m.count);
      ++counted[l];
    }
    EXPECT_EQ(counted, sizes);
    EXPECT_TRUE(all_connected(m));
  }
}

TEST(CoSlic, CountStaysNearTarget) {
  const BiTemporalPair pair = blocky_pair(160, 120, 2);
  const SuperpixelMap m = co_slic(pair, 192, 10.0, 1);
  EXPECT_GT(m.count, 192 / 2);
  EXPECT_LE(m.count, 192 * 3 / 2);
}

TEST(CoSlic, FollowsEdgesOfBothImages) {
  const BiTemporalPair pair = blocky_pair(120, 90, 4);
  const SuperpixelMap m = co_slic(pair, 60, 10.0, 0);
  // Nearly every superpixel sits on one side of both the vertical edge of
  // the pre image and the horizontal edge of the post image.
  std::vector<std::array<int, 4>> quadrant(m.count, std::array<int, 4>{});
  for (int y = 0; y < 90; ++y)
    for (int x = 0; x < 120; ++x) ++quadrant[m.label[y * 120 + x]][(x < 60 ? 0 : 1) + (y < 30 ? 0 : 2)];
  std::size_t impure = 0;
  for (const auto& q : quadrant) {
    const int total = q[0] + q[1] + q[2] + q[3];
    if (*std::max_element(q.begin(), q.end()) < 0.9 * total) ++impure;
  }
  EXPECT_LE(impure, quadrant.size() / 10);
}

TEST(CoSlic, DeterministicForSameInputs) {
  const BiTemporalPair pair(random_image(64, 64, 1), random_image(64, 64, 2));
  EXPECT_EQ(co_slic(pair, 80, 10.0, 5), co_slic(pair, 80, 10.0, 5));
}

TEST(CoSlic, RejectsBadArguments) {
  const BiTemporalPair pair(RasterImage(5, 5, 1, std::uint8_t{0}), RasterImage(5, 5, 1, std::uint8_t{0}));
  EXPECT_THROW(co_slic(pair, 26, 10.0, 0), UsageError);
  EXPECT_THROW(co_slic(pair, 1, 10.0, 0), UsageError);
  EXPECT_THROW(co_slic(pair, 4, 0.0, 0), UsageError);
}

TEST(CoSlic, AcceptsMultiBandInput) {
  RasterImage rgb(40, 40, 3, std::uint8_t{0});
  std::mt19937 rng(9);
  for (auto& x : rgb.data) x = static_cast<std::uint8_t>(rng());
  const BiTemporalPair pair(rgb, random_image(40, 40, 3));
  EXPECT_NO_THROW(co_slic(pair, 16, 10.0, 0).validate());
}

TEST(SelectTraining, FullyInsideIsSelected) {
  const SuperpixelMap m = grid_map(8, 8, 4);
  const auto ids = select_training_superpixels(m, PixelRect{0, 0, 4, 4});
  EXPECT_EQ(ids, std::vector<std::int32_t>{0});
}

TEST(SelectTraining, ExactlyHalfIsNotSelected) {
  const SuperpixelMap m = grid_map(8, 8, 4);
  // Superpixel 0 is half inside, superpixel 1 (x in [4,8)) has 3/4 inside.
  const auto ids = select_training_superpixels(m, PixelRect{2, 0, 7, 4});
  EXPECT_EQ(ids, std::vector<std::int32_t>{1});
}

TEST(SelectTraining, EmptySelectionThrows) {
  const SuperpixelMap m = grid_map(8, 8, 4);
  EXPECT_THROW(select_training_superpixels(m, PixelRect{0, 0, 2, 2}), DataError);
}

TEST(SelectTraining, MatchesBruteForceAndIsMonotone) {
  const BiTemporalPair pair(random_image(60, 50, 21), random_image(60, 50, 22));
  const SuperpixelMap m = co_slic(pair, 70, 10.0, 0);
  std::mt19937 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int x0 = static_cast<int>(rng() % 30), y0 = static_cast<int>(rng() % 25);
    const PixelRect r{x0, y0, std::min(60, x0 + 10 + static_cast<int>(rng() % 20)),
                      std::min(50, y0 + 10 + static_cast<int>(rng() % 25))};
    std::vector<int> inside(m.count, 0);
    for (int y = 0; y < 50; ++y)
      for (int x = 0; x < 60; ++x)
        if (r.contains(x, y)) ++inside[m.label[y * 60 + x]];
    std::vector<std::int32_t> expected;
    const auto sizes = m.sizes();
    for (int id = 0; id < m.count; ++id)
      if (2 * inside[id] > static_cast<int>(sizes[id])) expected.push_back(id);
    if (expected.empty()) {
      EXPECT_THROW(select_training_superpixels(m, r), DataError);
      continue;
    }
    const auto got = select_training_superpixels(m, r);
    EXPECT_EQ(got, expected);
    const PixelRect bigger{std::max(0, r.x0 - 5), std::max(0, r.y0 - 5), std::min(60, r.x1 + 5),
                           std::min(50, r.y1 + 5)};
    const auto more = select_training_superpixels(m, bigger);
    EXPECT_TRUE(std::includes(more.begin(), more.end(), got.begin(), got.end()));
  }
}

TEST(ExtractFeatures, FloorOfMean) {
  SuperpixelMap m;
  m.width = 2;
  m.height = 1;
  m.count = 1;
  m.label = {0, 0};
  const RasterImage img(2, 1, 1, std::vector<std::uint8_t>{10, 11});
  const FeatureSet f = extract_features(img, m);
  EXPECT_EQ(f.values, std::vector<std::uint8_t>{10});
  EXPECT_EQ(f.ids, std::vector<std::int32_t>{0});
}

TEST(ExtractFeatures, ConstantImage) {
  const SuperpixelMap m = grid_map(12, 9, 3);
  const FeatureSet f = extract_features(RasterImage(12, 9, 1, std::uint8_t{50}), m);
  ASSERT_EQ(f.size(), static_cast<std::size_t>(m.count));
  for (auto v : f.values) EXPECT_EQ(v, 50);
}

TEST(ExtractFeatures, SingleSuperpixelMatchesDirectSum) {
  const RasterImage img = random_image(37, 23, 8);
  SuperpixelMap m;
  m.width = 37;
  m.height = 23;
  m.count = 1;
  m.label.assign(37 * 23, 0);
  long sum = 0;
  for (auto x : img.data) sum += x;
  EXPECT_EQ(extract_features(img, m).values[0], sum / (37 * 23));
}

TEST(ExtractFeatures, SubsetFollowsRequestedOrder) {
  const RasterImage img = random_image(12, 12, 3);
  const SuperpixelMap m = grid_map(12, 12, 4);
  const FeatureSet all = extract_features(img, m);
  const std::vector<std::int32_t> ids{5, 0, 7};
  const FeatureSet some = extract_features(img, m, std::span<const std::int32_t>(ids));
  EXPECT_EQ(some.ids, ids);
  EXPECT_EQ(some.values, (std::vector<std::uint8_t>{all.values[5], all.values[0], all.values[7]}));
  const std::vector<std::int32_t> bad{9};
  EXPECT_THROW(extract_features(img, m, std::span<const std::int32_t>(bad)), DataError);
}

TEST(ExtractFeatures, EquivariantUnderIdRelabeling) {
  const RasterImage img = random_image(16, 16, 6);
  const SuperpixelMap m = grid_map(16, 16, 4);
  std::vector<int> perm(m.count);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(1));
  SuperpixelMap p = m;
  for (auto& l : p.label) l = perm[l];
  const FeatureSet a = extract_features(img, m);
  const FeatureSet b = extract_features(img, p);
  for (int id = 0; id < m.count; ++id) EXPECT_EQ(a.values[id], b.values[perm[id]]);
}
