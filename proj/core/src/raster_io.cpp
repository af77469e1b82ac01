#include "copulacd/raster_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "copulacd/error.hpp"

namespace copulacd {

namespace {

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

void check_shape(long long w, long long h, long long b) {
  if (w <= 0 || h <= 0 || b <= 0) {
    throw DataError("invalid raster shape " + std::to_string(w) + "x" + std::to_string(h) + "x" +
                    std::to_string(b));
  }
  const auto n = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
  if (n > kMaxElements || n * static_cast<std::uint64_t>(b) > kMaxElements) {
    throw DataError("dimension overflow: raster too large");
  }
}

// Netpbm header token reader that skips '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

long long parse_int(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError("malformed integer '" + tok + "' in " + path.string());
  }
}

RasterImage read_netpbm(std::istream& in, char kind, const std::filesystem::path& path) {
  const long long w = parse_int(next_token(in), path);
  const long long h = parse_int(next_token(in), path);
  const long long maxval = parse_int(next_token(in), path);
  const int bands = (kind == '3' || kind == '6') ? 3 : 1;
  check_shape(w, h, bands);
  if (maxval <= 0 || maxval > 65535) throw DataError("invalid maxval in " + path.string());
  if (maxval > 255) throw DataError("unsupported bit depth (maxval " + std::to_string(maxval) + ")");

  const auto n = static_cast<std::size_t>(w * h * bands);
  std::vector<std::uint8_t> data(n);
  if (kind == '5' || kind == '6') {
    // next_token consumed exactly one whitespace byte after maxval
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw DataError("truncated raster " + path.string());
  } else {
    for (auto& v : data) {
      const std::string tok = next_token(in);
      if (tok.empty()) throw DataError("truncated raster " + path.string());
      const long long x = parse_int(tok, path);
      if (x < 0 || x > maxval) throw DataError("pixel value out of range in " + path.string());
      v = static_cast<std::uint8_t>(x);
    }
  }
  return RasterImage(static_cast<int>(w), static_cast<int>(h), bands, std::move(data));
}

RasterImage read_text_matrix(std::istream& in, const std::filesystem::path& path) {
  long long w = 0, h = 0, b = 0;
  if (!(in >> w >> h >> b)) throw DataError("missing 'width height bands' header in " + path.string());
  check_shape(w, h, b);
  const auto n = static_cast<std::size_t>(w * h * b);
  std::vector<std::uint8_t> data(n);
  for (auto& v : data) {
    long long x;
    if (!(in >> x)) throw DataError("truncated text matrix " + path.string());
    if (x > 255 && x <= 65535) throw DataError("unsupported bit depth (value " + std::to_string(x) + ")");
    if (x < 0 || x > 255) throw DataError("pixel value out of range in " + path.string());
    v = static_cast<std::uint8_t>(x);
  }
  return RasterImage(static_cast<int>(w), static_cast<int>(h), static_cast<int>(b), std::move(data));
}

bool is_text_path(const std::filesystem::path& path) { return path.extension() == ".txt"; }

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

void write_text_matrix(std::ostream& out, int w, int h, int b, auto&& value_at) {
  out << w << ' ' << h << ' ' << b << '\n';
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < b; ++k) {
        if (x > 0 || k > 0) out << ' ';
        out << value_at(static_cast<std::size_t>(y) * w * b + static_cast<std::size_t>(x) * b + k);
      }
    }
    out << '\n';
  }
}

}  // namespace

RasterImage::RasterImage(int w, int h, int b, std::vector<std::uint8_t> values)
    : width(w), height(h), bands(b), data(std::move(values)) {
  validate();
}

RasterImage::RasterImage(int w, int h, int b, std::uint8_t fill) : width(w), height(h), bands(b) {
  check_shape(w, h, b);
  data.assign(static_cast<std::size_t>(w) * h * b, fill);
}

void RasterImage::validate() const {
  check_shape(width, height, bands);
  if (data.size() != static_cast<std::size_t>(width) * height * bands) {
    throw DataError("raster buffer size does not match width*height*bands");
  }
}

BiTemporalPair::BiTemporalPair(RasterImage pre, RasterImage post) : pre_(std::move(pre)), post_(std::move(post)) {
  pre_.validate();
  post_.validate();
  if (pre_.width != post_.width || pre_.height != post_.height) {
    throw DataError("pre/post images differ in size: " + std::to_string(pre_.width) + "x" +
                    std::to_string(pre_.height) + " vs " + std::to_string(post_.width) + "x" +
                    std::to_string(post_.height));
  }
}

void PixelRect::validate(int width, int height) const {
  if (!(0 <= x0 && x0 < x1 && x1 <= width && 0 <= y0 && y0 < y1 && y1 <= height)) {
    throw UsageError("rectangle [" + std::to_string(x0) + "," + std::to_string(x1) + ")x[" +
                     std::to_string(y0) + "," + std::to_string(y1) + ") is outside the " + std::to_string(width) +
                     "x" + std::to_string(height) + " image");
  }
}

ChangeMap::ChangeMap(int w, int h, std::uint8_t fill) : width(w), height(h) {
  check_shape(w, h, 1);
  labels.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
}

ChangeMap::ChangeMap(int w, int h, std::vector<std::uint8_t> values) : width(w), height(h), labels(std::move(values)) {
  validate();
}

std::size_t ChangeMap::changed_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

void ChangeMap::validate() const {
  check_shape(width, height, 1);
  if (labels.size() != static_cast<std::size_t>(width) * height) {
    throw DataError("change map size does not match width*height");
  }
  if (std::any_of(labels.begin(), labels.end(), [](std::uint8_t v) { return v > 1; })) {
    throw DataError("change map labels must be 0 or 1");
  }
}

RasterImage load_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const int c0 = in.peek();
  if (c0 == 'P') {
    in.get();
    const int kind = in.get();
    if (kind == '2' || kind == '3' || kind == '5' || kind == '6') {
      return read_netpbm(in, static_cast<char>(kind), path);
    }
    throw DataError("unsupported netpbm variant in " + path.string());
  }
  return read_text_matrix(in, path);
}

void save_raster(const RasterImage& img, const std::filesystem::path& path) {
  img.validate();
  auto out = open_for_write(path);
  if (is_text_path(path)) {
    write_text_matrix(out, img.width, img.height, img.bands, [&](std::size_t i) { return int{img.data[i]}; });
  } else {
    if (img.bands != 1 && img.bands != 3) {
      throw UsageError("netpbm output supports 1 or 3 bands; use a .txt path for " +
                       std::to_string(img.bands) + " bands");
    }
    out << (img.bands == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  }
  if (!out) throw DataError("failed writing " + path.string());
}

RasterImage to_intensity(const RasterImage& img) {
  img.validate();
  if (img.bands == 1) return img;
  RasterImage out(img.width, img.height, 1, std::uint8_t{0});
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    unsigned sum = 0;
    for (int b = 0; b < img.bands; ++b) sum += img.data[i * img.bands + b];
    out.data[i] = static_cast<std::uint8_t>(sum / static_cast<unsigned>(img.bands));
  }
  return out;
}

void save_change_map(const ChangeMap& map, const std::filesystem::path& path) {
  map.validate();
  std::vector<std::uint8_t> pix(map.labels.size());
  std::transform(map.labels.begin(), map.labels.end(), pix.begin(),
                 [](std::uint8_t l) { return static_cast<std::uint8_t>(l ? 255 : 0); });
  save_raster(RasterImage(map.width, map.height, 1, std::move(pix)), path);
}

ChangeMap load_change_map(const std::filesystem::path& path) {
  const RasterImage img = load_raster(path);
  if (img.bands != 1) throw DataError("change map must be single-band: " + path.string());
  std::vector<std::uint8_t> labels(img.data.size());
  std::transform(img.data.begin(), img.data.end(), labels.begin(),
                 [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 1 : 0); });
  return ChangeMap(img.width, img.height, std::move(labels));
}

void save_label_grid(std::span<const std::int32_t> labels, int width, int height,
                     const std::filesystem::path& path) {
  check_shape(width, height, 1);
  if (labels.size() != static_cast<std::size_t>(width) * height) {
    throw DataError("label grid size does not match width*height");
  }
  auto out = open_for_write(path);
  if (is_text_path(path)) {
    write_text_matrix(out, width, height, 1, [&](std::size_t i) { return labels[i]; });
  } else {
    out << "P5\n" << width << ' ' << height << "\n65535\n";
    for (const std::int32_t l : labels) {
      const auto v = static_cast<std::uint16_t>(static_cast<std::uint32_t>(l) & 0xFFFFu);
      const char be[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xFF)};
      out.write(be, 2);
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace copulacd
