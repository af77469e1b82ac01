#include "copulacd/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "copulacd/error.hpp"

namespace copulacd {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double sample_sd(std::span<const std::uint8_t> samples) {
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (const auto s : samples) mean += s;
  mean /= n;
  double ss = 0.0;
  for (const auto s : samples) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

double silverman_bandwidth(std::span<const std::uint8_t> samples) {
  if (samples.size() < 2) throw DataError("KDE needs at least two samples");
  const double sd = sample_sd(samples);
  if (!(sd > 0.0)) throw DataError("degenerate marginal: samples have zero variance");
  return 1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2);
}

double kde_cdf_at(std::span<const std::uint8_t> samples, double bandwidth, double x) {
  double acc = 0.0;
  for (const auto s : samples) acc += std_normal_cdf((x - s) / bandwidth);
  return acc / static_cast<double>(samples.size());
}

CdfTable fit_kde_cdf(std::span<const std::uint8_t> samples, const KdeOptions& options) {
  if (!(options.bandwidth_scale > 0.0)) throw UsageError("KDE bandwidth scale must be positive");
  CdfTable table;
  table.bandwidth = silverman_bandwidth(samples) * options.bandwidth_scale;
  table.sample_count = samples.size();

  for (int k = 0; k < kIntensityLevels; ++k) {
    table.entries[static_cast<std::size_t>(k)] = std::clamp(kde_cdf_at(samples, table.bandwidth, k), kCdfFloor, 1.0);
  }
  return table;
}

std::vector<double> pit(std::span<const std::uint8_t> features, const CdfTable& table) {
  std::vector<double> out(features.size());
  std::transform(features.begin(), features.end(), out.begin(), [&](std::uint8_t f) { return table[f]; });
  return out;
}

double empirical_joint_cdf(std::span<const std::uint8_t> g1, std::span<const std::uint8_t> g2, int x, int y) {
  if (g1.empty()) throw DataError("empirical joint CDF of an empty feature set");
  if (g1.size() != g2.size()) throw DataError("paired feature sets differ in length");
  std::size_t hits = 0;
  for (std::size_t m = 0; m < g1.size(); ++m) {
    if (g1[m] <= x && g2[m] <= y) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(g1.size());
}

}  // namespace copulacd
