#include "copulacd/synthgen.hpp"

#include <algorithm>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <random>
#include <regex>
#include <sstream>

#include "copulacd/error.hpp"
#include "copulacd/parallel.hpp"

namespace copulacd {

namespace {

enum Stream : std::uint32_t { kCopula = 1, kIndependentPre = 2, kIndependentPost = 3, kNoisePre = 4, kNoisePost = 5 };

std::mt19937_64 row_rng(std::uint64_t seed, int row, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_quantile(double p) {
  p = std::clamp(p, 1e-15, 1.0 - 1e-15);
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

// Box blur with mirrored borders, normalized so that i.i.d. unit-variance
// input keeps unit variance at every pixel.
std::vector<double> blur3(const std::vector<double>& z, int w, int h) {
  const auto mirror = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
  std::vector<double> out(z.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Multiplicity of each source pixel under mirroring.
      std::array<std::size_t, 9> src{};
      for (int dy = -1, k = 0; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx, ++k) {
          const int yy = h > 1 ? mirror(y + dy, h) : 0;
          const int xx = w > 1 ? mirror(x + dx, w) : 0;
          src[static_cast<std::size_t>(k)] = static_cast<std::size_t>(yy) * w + xx;
        }
      }
      std::sort(src.begin(), src.end());
      double sum = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < src.size();) {
        std::size_t j = i;
        while (j < src.size() && src[j] == src[i]) ++j;
        const double c = static_cast<double>(j - i);
        sum += c * z[src[i]];
        sq += c * c;
        i = j;
      }
      out[static_cast<std::size_t>(y) * w + x] = sum / std::sqrt(sq);
    }
  }
  return out;
}

std::uint8_t quantize(double x) { return static_cast<std::uint8_t>(std::clamp(std::round(x), 0.0, 255.0)); }

}  // namespace

void MarginalSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b)) throw UsageError("marginal parameters must be finite");
  switch (kind) {
    case Kind::normal:
      if (!(b > 0.0)) throw UsageError("degenerate marginal: normal sd must be > 0");
      return;
    case Kind::uniform:
      if (!(b > a)) throw UsageError("degenerate marginal: uniform needs low < high");
      return;
    case Kind::gamma:
      if (!(a > 0.0 && b > 0.0)) throw UsageError("degenerate marginal: gamma shape and scale must be > 0");
      return;
  }
}

double MarginalSpec::quantile(double p) const {
  switch (kind) {
    case Kind::normal: return a + b * norm_quantile(p);
    case Kind::uniform: return a + (b - a) * p;
    case Kind::gamma:
      return boost::math::quantile(boost::math::gamma_distribution<double>(a, b), std::clamp(p, 1e-15, 1.0 - 1e-15));
  }
  return 0.0;
}

double MarginalSpec::cdf(double x) const {
  switch (kind) {
    case Kind::normal: return norm_cdf((x - a) / b);
    case Kind::uniform: return std::clamp((x - a) / (b - a), 0.0, 1.0);
    case Kind::gamma: return x <= 0.0 ? 0.0 : boost::math::cdf(boost::math::gamma_distribution<double>(a, b), x);
  }
  return 0.0;
}

std::string MarginalSpec::to_string() const {
  std::ostringstream out;
  out.precision(17);
  out << (kind == Kind::normal ? "normal" : kind == Kind::uniform ? "uniform" : "gamma") << "(" << a << "," << b
      << ")";
  return out.str();
}

MarginalSpec MarginalSpec::parse(const std::string& text) {
  static const std::regex re(R"(^\s*(normal|uniform|gamma)\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw UsageError("cannot parse marginal '" + text + "'");
  MarginalSpec s;
  s.kind = m[1] == "normal" ? Kind::normal : m[1] == "uniform" ? Kind::uniform : Kind::gamma;
  try {
    s.a = std::stod(m[2]);
    s.b = std::stod(m[3]);
  } catch (const std::exception&) {
    throw UsageError("cannot parse marginal '" + text + "'");
  }
  s.validate();
  return s;
}

void SynthSpec::validate() const {
  if (width < 1 || height < 1) throw UsageError("synthetic scene dimensions must be positive");
  dependence.validate();
  for (const auto& r : change_regions) r.validate(width, height);
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw UsageError("noise_sigma must be >= 0");
  marginal_pre.validate();
  marginal_post.validate();
  if (change_marginal_post) change_marginal_post->validate();
}

SynthScene generate(const SynthSpec& spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  ChangeMap truth(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (const auto& r : spec.change_regions) {
        if (r.contains(x, y)) truth.labels[static_cast<std::size_t>(y) * w + x] = 1;
      }
    }
  }

  std::vector<double> z1(n), z2(n);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    std::mt19937_64 seed_rng = row_rng(spec.seed, y, kCopula);
    const auto pairs = sample(spec.dependence, static_cast<std::size_t>(w), seed_rng());
    std::mt19937_64 ind1 = row_rng(spec.seed, y, kIndependentPre);
    std::mt19937_64 ind2 = row_rng(spec.seed, y, kIndependentPost);
    std::normal_distribution<double> normal;
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      const double a = normal(ind1);
      const double b = normal(ind2);
      if (truth.labels[i]) {
        z1[i] = a;
        z2[i] = b;
      } else {
        z1[i] = norm_quantile(pairs[static_cast<std::size_t>(x)][0]);
        z2[i] = norm_quantile(pairs[static_cast<std::size_t>(x)][1]);
      }
    }
  });
  if (spec.blur) {
    z1 = blur3(z1, w, h);
    z2 = blur3(z2, w, h);
  }

  std::vector<std::uint8_t> pre(n), post(n);
  const MarginalSpec& changed_post = spec.change_marginal_post ? *spec.change_marginal_post : spec.marginal_post;
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    std::mt19937_64 noise1 = row_rng(spec.seed, y, kNoisePre);
    std::mt19937_64 noise2 = row_rng(spec.seed, y, kNoisePost);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int x = 0; x < w; ++x) {
      const std::size_t i = row * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      const MarginalSpec& m2 = truth.labels[i] ? changed_post : spec.marginal_post;
      double a = spec.marginal_pre.quantile(norm_cdf(z1[i]));
      double b = m2.quantile(norm_cdf(z2[i]));
      if (spec.noise_sigma > 0.0) {
        a += spec.noise_sigma * normal(noise1);
        b += spec.noise_sigma * normal(noise2);
      }
      pre[i] = quantize(a);
      post[i] = quantize(b);
    }
  });

  return SynthScene{BiTemporalPair(RasterImage(w, h, 1, std::move(pre)), RasterImage(w, h, 1, std::move(post))),
                    std::move(truth)};
}

}  // namespace copulacd
