#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copulacd/classical_copulas.hpp"
#include "copulacd/raster_io.hpp"

namespace copulacd {

/// Continuous intensity distribution; samples are rounded and clipped to
/// [0,255].
struct MarginalSpec {
  enum class Kind { normal, uniform, gamma };
  Kind kind = Kind::normal;
  /// normal: (mean, sd); uniform: (low, high); gamma: (shape, scale).
  double a = 128.0;
  double b = 32.0;

  static MarginalSpec normal(double mean, double sd) { return {Kind::normal, mean, sd}; }
  static MarginalSpec uniform(double low, double high) { return {Kind::uniform, low, high}; }
  static MarginalSpec gamma(double shape, double scale) { return {Kind::gamma, shape, scale}; }

  /// Throws UsageError for degenerate parameters.
  void validate() const;
  double quantile(double p) const;
  double cdf(double x) const;
  /// "normal(120,30)", "uniform(0,255)" or "gamma(2,20)".
  std::string to_string() const;
  static MarginalSpec parse(const std::string& text);

  friend bool operator==(const MarginalSpec&, const MarginalSpec&) = default;
};

struct SynthSpec {
  int width = 256;
  int height = 256;
  CopulaFamily dependence = CopulaFamily::gaussian(0.85);
  std::vector<PixelRect> change_regions;
  /// Additive Gaussian noise in intensity units, applied per image.
  double noise_sigma = 0.0;
  MarginalSpec marginal_pre = MarginalSpec::normal(110.0, 30.0);
  MarginalSpec marginal_post = MarginalSpec::normal(120.0, 28.0);
  /// Post-image marginal inside change regions; marginal_post when unset.
  std::optional<MarginalSpec> change_marginal_post;
  /// 3x3 box blur of the latent normal scores.
  bool blur = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthScene {
  BiTemporalPair pair;
  ChangeMap truth;
};

/// Unchanged pixels carry the requested copula dependence; changed pixels
/// are independent across the two dates. Dependence lives on latent normal
/// scores, which are optionally box-blurred with variance-preserving weights
/// and then mapped through each image's marginal. Deterministic per seed.
SynthScene generate(const SynthSpec& spec);

}  // namespace copulacd
