#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace copulacd {

/// 8-bit image, row-major, band-interleaved (pixel (x, y) band b lives at
/// ((y * width + x) * bands + b)).
struct RasterImage {
  int width = 0;
  int height = 0;
  int bands = 1;
  std::vector<std::uint8_t> data;

  RasterImage() = default;
  RasterImage(int w, int h, int b, std::vector<std::uint8_t> values);
  /// Constant-filled image.
  RasterImage(int w, int h, int b, std::uint8_t fill);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint8_t at(int x, int y, int band = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * bands + band];
  }
  std::uint8_t& at(int x, int y, int band = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * bands + band];
  }

  /// Throws DataError if the buffer does not match the declared shape.
  void validate() const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

/// Co-registered pre/post acquisitions. Band counts may differ.
class BiTemporalPair {
 public:
  BiTemporalPair(RasterImage pre, RasterImage post);

  const RasterImage& pre() const { return pre_; }
  const RasterImage& post() const { return post_; }
  int width() const { return pre_.width; }
  int height() const { return pre_.height; }

 private:
  RasterImage pre_;
  RasterImage post_;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  std::size_t area() const { return static_cast<std::size_t>(x1 - x0) * static_cast<std::size_t>(y1 - y0); }
  /// Throws UsageError unless 0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height.
  void validate(int width, int height) const;

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Binary per-pixel change labels: 0 = unchanged, 1 = changed.
struct ChangeMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;

  ChangeMap() = default;
  ChangeMap(int w, int h, std::uint8_t fill = 0);
  ChangeMap(int w, int h, std::vector<std::uint8_t> values);

  std::size_t changed_count() const;
  void validate() const;

  friend bool operator==(const ChangeMap&, const ChangeMap&) = default;
};

/// Reads PGM/PPM (P2, P3, P5, P6) or the plain-text matrix format
/// ("width height bands" header, then whitespace-separated integers).
/// Files whose maxval exceeds 255 are rejected as unsupported bit depth.
RasterImage load_raster(const std::filesystem::path& path);

/// Writes by extension: ".txt" -> text matrix, otherwise binary PGM (1 band)
/// or PPM (3 bands). Other band counts require the text format.
void save_raster(const RasterImage& img, const std::filesystem::path& path);

/// Collapse to one band with floor(mean over bands).
RasterImage to_intensity(const RasterImage& img);

/// Changed pixels are written as 255, unchanged as 0.
void save_change_map(const ChangeMap& map, const std::filesystem::path& path);

/// Any nonzero pixel counts as changed; multi-band input is rejected.
ChangeMap load_change_map(const std::filesystem::path& path);

/// Debug export of an integer label grid as a 16-bit PGM (labels mod 65536)
/// or a text matrix (".txt").
void save_label_grid(std::span<const std::int32_t> labels, int width, int height,
                     const std::filesystem::path& path);

}  // namespace copulacd
