#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "copulacd/checkpoint.hpp"
#include "copulacd/error.hpp"
#include "test_util.hpp"

using namespace copulacd;
using copulacd::testing::TempDir;

namespace {

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.net = init_net({2, 7, 3, 1}, 12, Activation::sigmoid);
  c.net.output_margin = 0.015;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (auto& p : c.net.params) p = nd(rng) * 1e3;
  c.net.params[0] = -0.0;
  c.net.params[1] = std::numeric_limits<double>::denorm_min();
  c.net.params[2] = std::nextafter(1.0, 2.0);
  std::vector<std::uint8_t> g(100);
  for (auto& x : g) x = static_cast<std::uint8_t>(rng());
  c.table1 = fit_kde_cdf(g);
  std::reverse(g.begin(), g.end());
  c.table2 = fit_kde_cdf(g, KdeOptions{1.7});
  c.g1 = g;
  c.g2.assign(g.rbegin(), g.rend());
  c.config_text = "[general]\nseed = 4\n; unicode \xc3\xa9 and \0 bytes";
  c.config_text.push_back('\0');
  return c;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Checkpoint, EncodeDecodeIsBitExact) {
  const Checkpoint c = sample_checkpoint();
  const auto bytes = encode_checkpoint(c);
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_TRUE(bitwise_equal(back.net.params, c.net.params));
  EXPECT_TRUE(std::signbit(back.net.params[0]));
  EXPECT_EQ(back, c);
  EXPECT_EQ(encode_checkpoint(back), bytes);
}

TEST(Checkpoint, FileRoundTrip) {
  TempDir dir;
  const Checkpoint c = sample_checkpoint();
  save_checkpoint(c, dir / "m.ckpt");
  EXPECT_EQ(load_checkpoint(dir / "m.ckpt"), c);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), DataError);
}

TEST(Checkpoint, DetectsCorruption) {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  for (std::size_t pos : {std::size_t{20}, bytes.size() / 2, bytes.size() - 9}) {
    auto bad = bytes;
    bad[pos] ^= 0x10;
    EXPECT_THROW(decode_checkpoint(bad), DataError) << "flip at " << pos;
  }
}

TEST(Checkpoint, DetectsTruncationMagicVersionAndTrailingBytes) {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  for (std::size_t keep : {std::size_t{0}, std::size_t{5}, std::size_t{12}, bytes.size() - 1}) {
    EXPECT_THROW(decode_checkpoint(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + keep)), DataError);
  }
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(magic), DataError);
  auto version = bytes;
  version[8] = static_cast<std::uint8_t>(kCheckpointVersion + 1);
  try {
    decode_checkpoint(version);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(decode_checkpoint(longer), DataError);
}

TEST(Checkpoint, RejectsUnpairedFeatures) {
  Checkpoint c = sample_checkpoint();
  c.g2.pop_back();
  EXPECT_THROW(encode_checkpoint(c), UsageError);
}
