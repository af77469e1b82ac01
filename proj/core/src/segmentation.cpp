#include "copulacd/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "copulacd/error.hpp"

namespace copulacd {

namespace {

struct Center {
  double x;
  double y;
  double c1;
  double c2;
};

// Intensities rescaled so the image's own dynamic range spans 0..255.
std::vector<double> range_normalized(const RasterImage& gray) {
  const auto [lo, hi] = std::minmax_element(gray.data.begin(), gray.data.end());
  const double range = std::max(1.0, static_cast<double>(*hi) - static_cast<double>(*lo));
  std::vector<double> out(gray.data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 255.0 * (gray.data[i] - *lo) / range;
  return out;
}

class ComponentMerger {
 public:
  ComponentMerger(int width, int height, const std::vector<std::int32_t>& label, const std::vector<double>& a1,
                  const std::vector<double>& a2)
      : w_(width), h_(height), comp_(label.size(), -1) {
    label_components(label, a1, a2);
  }

  // Keeps the largest fragment of each label if it is big enough, absorbs
  // everything else into the most similar adjacent kept region.
  std::vector<std::int32_t> merge(std::size_t min_size) {
    const std::size_t nc = size_.size();
    std::map<std::int32_t, std::size_t> best_of_label;
    for (std::size_t c = 0; c < nc; ++c) {
      auto it = best_of_label.find(orig_label_[c]);
      if (it == best_of_label.end() || size_[c] > size_[it->second]) best_of_label[orig_label_[c]] = c;
    }
    std::vector<bool> resolved(nc, false);
    bool any = false;
    for (const auto& [lab, c] : best_of_label) {
      if (size_[c] >= min_size) {
        resolved[c] = true;
        any = true;
      }
    }
    if (!any) {
      const auto biggest = std::max_element(size_.begin(), size_.end()) - size_.begin();
      resolved[static_cast<std::size_t>(biggest)] = true;
    }

    parent_.resize(nc);
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    std::vector<double> s1 = sum1_, s2 = sum2_;
    std::vector<double> agg_size(size_.begin(), size_.end());

    bool pending = true;
    while (pending) {
      pending = false;
      bool progressed = false;
      for (std::size_t c = 0; c < nc; ++c) {
        if (resolved[c]) continue;
        std::map<std::size_t, long> border;  // root -> shared edge count
        for (const auto& [nb, len] : adjacency_[c]) {
          if (resolved[nb]) border[find(nb)] += len;
        }
        if (border.empty()) {
          pending = true;
          continue;
        }
        const double m1 = sum1_[c] / size_[c];
        const double m2 = sum2_[c] / size_[c];
        std::size_t target = border.begin()->first;
        double best = std::numeric_limits<double>::infinity();
        long best_len = -1;
        for (const auto& [root, len] : border) {
          const double d = 0.5 * (std::abs(m1 - s1[root] / agg_size[root]) + std::abs(m2 - s2[root] / agg_size[root]));
          if (d < best || (d == best && len > best_len)) {
            best = d;
            best_len = len;
            target = root;
          }
        }
        parent_[c] = target;
        s1[target] += sum1_[c];
        s2[target] += sum2_[c];
        agg_size[target] += static_cast<double>(size_[c]);
        resolved[c] = true;
        progressed = true;
      }
      if (pending && !progressed) throw NumericalError("superpixel merge failed to make progress");
    }

    std::vector<std::int32_t> dense(nc, -1);
    std::int32_t next = 0;
    std::vector<std::int32_t> out(comp_.size());
    for (std::size_t p = 0; p < comp_.size(); ++p) {
      const std::size_t root = find(static_cast<std::size_t>(comp_[p]));
      if (dense[root] < 0) dense[root] = next++;
      out[p] = dense[root];
    }
    return out;
  }

 private:
  void label_components(const std::vector<std::int32_t>& label, const std::vector<double>& a1,
                        const std::vector<double>& a2) {
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < label.size(); ++start) {
      if (comp_[start] >= 0) continue;
      const auto id = static_cast<std::int32_t>(size_.size());
      size_.push_back(0);
      sum1_.push_back(0.0);
      sum2_.push_back(0.0);
      orig_label_.push_back(label[start]);
      comp_[start] = id;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        ++size_[id];
        sum1_[id] += a1[p];
        sum2_[id] += a2[p];
        const int x = static_cast<int>(p % w_);
        const int y = static_cast<int>(p / w_);
        const std::array<std::array<int, 2>, 4> nbs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
        for (const auto& [nx, ny] : nbs) {
          if (nx < 0 || ny < 0 || nx >= w_ || ny >= h_) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * w_ + nx;
          if (comp_[q] < 0 && label[q] == label[start]) {
            comp_[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
    adjacency_.assign(size_.size(), {});
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * w_ + x;
        if (x + 1 < w_) add_edge(comp_[p], comp_[p + 1]);
        if (y + 1 < h_) add_edge(comp_[p], comp_[p + w_]);
      }
    }
  }

  void add_edge(std::int32_t a, std::int32_t b) {
    if (a == b) return;
    ++adjacency_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    ++adjacency_[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
  }

  std::size_t find(std::size_t c) {
    while (parent_[c] != c) {
      parent_[c] = parent_[parent_[c]];
      c = parent_[c];
    }
    return c;
  }

  int w_;
  int h_;
  std::vector<std::int32_t> comp_;
  std::vector<std::size_t> size_;
  std::vector<double> sum1_;
  std::vector<double> sum2_;
  std::vector<std::int32_t> orig_label_;
  std::vector<std::map<std::size_t, long>> adjacency_;
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<std::size_t> SuperpixelMap::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(std::max(count, 0)), 0);
  for (const std::int32_t l : label) {
    if (l < 0 || l >= count) throw DataError("superpixel label out of range");
    ++out[static_cast<std::size_t>(l)];
  }
  return out;
}

void SuperpixelMap::validate() const {
  if (width <= 0 || height <= 0 || label.size() != static_cast<std::size_t>(width) * height) {
    throw DataError("superpixel map shape mismatch");
  }
  const auto s = sizes();
  if (std::find(s.begin(), s.end(), std::size_t{0}) != s.end()) throw DataError("superpixel map has unused ids");
}

SuperpixelMap co_slic(const BiTemporalPair& pair, int n_target, double compactness, std::uint64_t seed,
                      const SlicOptions& options) {
  const int w = pair.width();
  const int h = pair.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (n_target < 2) throw UsageError("superpixel count must be at least 2");
  if (static_cast<std::size_t>(n_target) > n) {
    throw UsageError("superpixel count " + std::to_string(n_target) + " exceeds pixel count " + std::to_string(n));
  }
  if (!(compactness > 0.0)) throw UsageError("compactness must be positive");

  const std::vector<double> a1 = range_normalized(to_intensity(pair.pre()));
  const std::vector<double> a2 = range_normalized(to_intensity(pair.post()));
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

  const int nx = std::clamp(static_cast<int>(std::lround(std::sqrt(double(n_target) * w / h))), 1, w);
  const int ny = std::clamp(static_cast<int>(std::lround(double(n_target) / nx)), 1, h);
  const double step_x = double(w) / nx;
  const double step_y = double(h) / ny;
  const double s = std::sqrt(double(n) / n_target);

  auto gradient = [&](int x, int y) {
    const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    double g = 0.0;
    for (const auto* a : {&a1, &a2}) {
      const double gx = (*a)[idx(xp, y)] - (*a)[idx(xm, y)];
      const double gy = (*a)[idx(x, yp)] - (*a)[idx(x, ym)];
      g += gx * gx + gy * gy;
    }
    return g;
  };

  std::mt19937_64 rng(seed);
  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int cx = std::min(static_cast<int>((i + 0.5) * step_x), w - 1);
      const int cy = std::min(static_cast<int>((j + 0.5) * step_y), h - 1);
      std::array<std::array<int, 2>, 9> cand{};
      int m = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) cand[static_cast<std::size_t>(m++)] = {cx + dx, cy + dy};
      std::shuffle(cand.begin(), cand.end(), rng);
      int bx = cx, by = cy;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [x, y] : cand) {
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        const double g = gradient(x, y);
        if (g < best) {
          best = g;
          bx = x;
          by = y;
        }
      }
      centers.push_back({double(bx), double(by), a1[idx(bx, by)], a2[idx(bx, by)]});
    }
  }

  const double spatial_weight = (compactness * compactness) / (s * s);
  const int radius = static_cast<int>(std::ceil(std::max(step_x, step_y)));
  std::vector<std::int32_t> label(n, -1);
  std::vector<double> dist(n);

  for (int iter = 0; iter < options.iterations; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(label.begin(), label.end(), -1);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      const int x_lo = std::max(0, static_cast<int>(c.x) - radius), x_hi = std::min(w - 1, static_cast<int>(c.x) + radius);
      const int y_lo = std::max(0, static_cast<int>(c.y) - radius), y_hi = std::min(h - 1, static_cast<int>(c.y) + radius);
      for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
          const std::size_t p = idx(x, y);
          const double dc = 0.5 * (std::abs(a1[p] - c.c1) + std::abs(a2[p] - c.c2));
          const double dx = x - c.x, dy = y - c.y;
          const double d = dc * dc + (dx * dx + dy * dy) * spatial_weight;
          if (d < dist[p]) {
            dist[p] = d;
            label[p] = static_cast<std::int32_t>(k);
          }
        }
      }
    }
    // Pixels outside every search window fall back to the spatially nearest center.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t p = idx(x, y);
        if (label[p] >= 0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < centers.size(); ++k) {
          const double dx = x - centers[k].x, dy = y - centers[k].y;
          if (dx * dx + dy * dy < best) {
            best = dx * dx + dy * dy;
            label[p] = static_cast<std::int32_t>(k);
          }
        }
      }
    }
    std::vector<std::array<double, 5>> acc(centers.size(), {0, 0, 0, 0, 0});
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t p = idx(x, y);
        auto& a = acc[static_cast<std::size_t>(label[p])];
        a[0] += x;
        a[1] += y;
        a[2] += a1[p];
        a[3] += a2[p];
        a[4] += 1.0;
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (acc[k][4] > 0) centers[k] = {acc[k][0] / acc[k][4], acc[k][1] / acc[k][4], acc[k][2] / acc[k][4], acc[k][3] / acc[k][4]};
    }
  }

  const auto min_size = std::max<std::size_t>(1, n / static_cast<std::size_t>(n_target) /
                                                     static_cast<std::size_t>(std::max(1, options.min_size_divisor)));
  ComponentMerger merger(w, h, label, a1, a2);
  SuperpixelMap out;
  out.width = w;
  out.height = h;
  out.label = merger.merge(min_size);
  out.count = 1 + *std::max_element(out.label.begin(), out.label.end());
  return out;
}

std::vector<std::int32_t> select_training_superpixels(const SuperpixelMap& map, const TrainingRegion& region) {
  region.validate(map.width, map.height);
  const auto total = map.sizes();
  std::vector<std::size_t> inside(total.size(), 0);
  for (int y = region.y0; y < region.y1; ++y) {
    for (int x = region.x0; x < region.x1; ++x) {
      ++inside[static_cast<std::size_t>(map.label[static_cast<std::size_t>(y) * map.width + x])];
    }
  }
  std::vector<std::int32_t> ids;
  for (std::size_t j = 0; j < total.size(); ++j) {
    if (2 * inside[j] > total[j]) ids.push_back(static_cast<std::int32_t>(j));
  }
  if (ids.empty()) throw DataError("training region selects no superpixels; enlarge the region");
  return ids;
}

FeatureSet extract_features(const RasterImage& img, const SuperpixelMap& map,
                            std::optional<std::span<const std::int32_t>> ids) {
  if (img.bands != 1) throw UsageError("extract_features expects a single-band image");
  if (img.width != map.width || img.height != map.height) {
    throw DataError("image and superpixel map dimensions differ");
  }
  std::vector<std::uint64_t> sum(static_cast<std::size_t>(map.count), 0);
  std::vector<std::uint64_t> cnt(static_cast<std::size_t>(map.count), 0);
  for (std::size_t p = 0; p < map.label.size(); ++p) {
    const auto l = static_cast<std::size_t>(map.label[p]);
    sum[l] += img.data[p];
    ++cnt[l];
  }
  FeatureSet out;
  auto push = [&](std::int32_t id) {
    if (id < 0 || id >= map.count) throw DataError("superpixel id " + std::to_string(id) + " out of range");
    const auto l = static_cast<std::size_t>(id);
    if (cnt[l] == 0) throw DataError("superpixel id " + std::to_string(id) + " is empty");
    out.ids.push_back(id);
    out.values.push_back(static_cast<std::uint8_t>(sum[l] / cnt[l]));
  };
  if (ids && !ids->empty()) {
    out.ids.reserve(ids->size());
    out.values.reserve(ids->size());
    for (const std::int32_t id : *ids) push(id);
  } else {
    for (std::int32_t id = 0; id < map.count; ++id) push(id);
  }
  return out;
}

}  // namespace copulacd
