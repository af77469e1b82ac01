#include "copulacd/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "copulacd/error.hpp"

namespace copulacd {

namespace {

// Linear-interpolated quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::array<double, 2> memberships_for(double x, const std::array<double, 2>& c, double exponent) {
  const double d0 = std::abs(x - c[0]);
  const double d1 = std::abs(x - c[1]);
  if (d0 == 0.0 && d1 == 0.0) return {0.5, 0.5};
  if (d0 == 0.0) return {1.0, 0.0};
  if (d1 == 0.0) return {0.0, 1.0};
  // u_0 = 1 / (1 + (d0/d1)^exponent)
  const double r = std::pow(d0 / d1, exponent);
  const double u0 = 1.0 / (1.0 + r);
  return {u0, 1.0 - u0};
}

}  // namespace

void FcmOptions::validate() const {
  if (!(fuzzifier > 1.0) || !std::isfinite(fuzzifier)) throw UsageError("fcm fuzzifier must be > 1");
  if (!(tolerance > 0.0)) throw UsageError("fcm tolerance must be > 0");
  if (max_iterations < 1) throw UsageError("fcm max_iterations must be >= 1");
}

std::vector<double> negative_log_scores(std::span<const double> pdfs) {
  std::vector<double> out(pdfs.size());
  for (std::size_t i = 0; i < pdfs.size(); ++i) {
    if (!(pdfs[i] > 0.0) || !std::isfinite(pdfs[i])) throw DataError("densities must be positive and finite");
    out[i] = -std::log10(pdfs[i]);
  }
  return out;
}

double fcm_objective(std::span<const double> scores, std::span<const std::array<double, 2>> memberships,
                     const std::array<double, 2>& centers, double fuzzifier) {
  double j = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (int k = 0; k < 2; ++k) {
      const double d = scores[i] - centers[k];
      j += std::pow(memberships[i][k], fuzzifier) * d * d;
    }
  }
  return j;
}

FcmResult fcm_two_class(std::span<const double> scores, const FcmOptions& options) {
  options.validate();
  std::vector<double> sorted(scores.begin(), scores.end());
  for (const double s : sorted) {
    if (!std::isfinite(s)) throw DataError("scores must be finite");
  }
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || sorted.front() == sorted.back()) throw DataError("degenerate scores");

  FcmResult res;
  std::array<double, 2> c{quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.75)};
  if (c[0] == c[1]) {
    std::mt19937_64 rng(options.seed);
    const double half = (sorted.back() - sorted.front()) / 2.0;
    std::uniform_real_distribution<double> jitter(0.25 * half, 0.75 * half);
    c[0] -= jitter(rng);
    c[1] += jitter(rng);
  }

  const double m = options.fuzzifier;
  const double exponent = 2.0 / (m - 1.0);
  const std::size_t n = scores.size();
  res.memberships.resize(n);
  for (int it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) res.memberships[i] = memberships_for(scores[i], c, exponent);
    std::array<double, 2> next{};
    for (int k = 0; k < 2; ++k) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = std::pow(res.memberships[i][k], m);
        num += w * scores[i];
        den += w;
      }
      next[k] = den > 0.0 ? num / den : c[k];
    }
    const double shift = std::max(std::abs(next[0] - c[0]), std::abs(next[1] - c[1]));
    c = next;
    res.objective.push_back(fcm_objective(scores, res.memberships, c, m));
    res.iterations = it + 1;
    if (shift < options.tolerance) {
      res.converged = true;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) res.memberships[i] = memberships_for(scores[i], c, exponent);

  if (c[0] > c[1]) {
    std::swap(c[0], c[1]);
    for (auto& u : res.memberships) std::swap(u[0], u[1]);
  }
  res.centers = c;
  res.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.labels[i] = res.memberships[i][1] > res.memberships[i][0] ? 1 : 0;
  return res;
}

ChangeMap labels_to_mask(const SuperpixelMap& map, std::span<const std::uint8_t> labels) {
  if (labels.size() != static_cast<std::size_t>(map.count)) {
    throw DataError("label count does not match the number of superpixels");
  }
  ChangeMap out(map.width, map.height);
  for (std::size_t p = 0; p < map.label.size(); ++p) {
    const std::int32_t id = map.label[p];
    if (id < 0 || id >= map.count) throw DataError("superpixel map holds an out-of-range id");
    out.labels[p] = labels[static_cast<std::size_t>(id)] ? 1 : 0;
  }
  return out;
}

}  // namespace copulacd
