#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace copulacd {

inline constexpr int kIntensityLevels = 256;
inline constexpr double kCdfFloor = 1e-6;

/// Marginal CDF sampled at every 8-bit intensity level.
struct CdfTable {
  std::array<double, kIntensityLevels> entries{};
  double bandwidth = 0.0;
  std::uint64_t sample_count = 0;

  double operator[](std::uint8_t level) const { return entries[level]; }

  friend bool operator==(const CdfTable&, const CdfTable&) = default;
};

struct KdeOptions {
  /// Multiplies the Silverman bandwidth 1.06 * sd * n^(-1/5).
  double bandwidth_scale = 1.0;
};

/// Silverman's rule-of-thumb bandwidth for the given samples.
double silverman_bandwidth(std::span<const std::uint8_t> samples);

/// Gaussian-kernel estimate of the sample CDF, (1/n) sum Phi((k - x_i) / h),
/// at k = 0..255, clamped into [kCdfFloor, 1].
/// Throws DataError for fewer than two samples or zero sample variance.
CdfTable fit_kde_cdf(std::span<const std::uint8_t> samples, const KdeOptions& options = {});

/// KDE CDF at an arbitrary point, without clamping. Used to cross-check tables.
double kde_cdf_at(std::span<const std::uint8_t> samples, double bandwidth, double x);

/// Probability integral transform by table lookup.
std::vector<double> pit(std::span<const std::uint8_t> features, const CdfTable& table);

/// Fraction of pairs (g1[m], g2[m]) with g1[m] <= x and g2[m] <= y.
/// Throws DataError for empty or unequal-length inputs.
double empirical_joint_cdf(std::span<const std::uint8_t> g1, std::span<const std::uint8_t> g2, int x, int y);

}  // namespace copulacd
