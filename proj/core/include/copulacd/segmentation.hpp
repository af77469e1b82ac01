#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "copulacd/raster_io.hpp"

namespace copulacd {

/// One label grid shared by both acquisitions; ids are dense in [0, count).
struct SuperpixelMap {
  int width = 0;
  int height = 0;
  int count = 0;
  std::vector<std::int32_t> label;

  /// Pixels per superpixel, indexed by id.
  std::vector<std::size_t> sizes() const;
  /// Throws DataError on out-of-range or unused ids.
  void validate() const;

  friend bool operator==(const SuperpixelMap&, const SuperpixelMap&) = default;
};

using TrainingRegion = PixelRect;

/// Integer mean intensity per superpixel, in the order of `ids`.
struct FeatureSet {
  std::vector<std::uint8_t> values;
  std::vector<std::int32_t> ids;

  std::size_t size() const { return values.size(); }
};

struct SlicOptions {
  int iterations = 10;
  /// Fragments smaller than area_per_superpixel / min_size_divisor are merged away.
  int min_size_divisor = 4;
};

/// Joint SLIC over both (intensity-collapsed) images of the pair. The color
/// term is the mean of the two range-normalized absolute intensity
/// differences, so each modality contributes on the same 0..255 scale;
/// `compactness` weights the spatial term as in standard SLIC. The seed only
/// breaks ties when seeds are nudged to the lowest-gradient 3x3 position.
/// Every returned superpixel is 4-connected.
SuperpixelMap co_slic(const BiTemporalPair& pair, int n_target, double compactness, std::uint64_t seed,
                      const SlicOptions& options = {});

/// Ids whose fraction of pixels inside `region` is strictly greater than 0.5,
/// ascending. Throws DataError when nothing qualifies.
std::vector<std::int32_t> select_training_superpixels(const SuperpixelMap& map, const TrainingRegion& region);

/// Floor(mean) of `img` over each requested superpixel (all ids when `ids`
/// is empty/nullopt).
FeatureSet extract_features(const RasterImage& img, const SuperpixelMap& map,
                            std::optional<std::span<const std::int32_t>> ids = std::nullopt);

}  // namespace copulacd
