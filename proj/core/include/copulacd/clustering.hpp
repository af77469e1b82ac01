#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "copulacd/raster_io.hpp"
#include "copulacd/segmentation.hpp"

namespace copulacd {

struct FcmOptions {
  double fuzzifier = 2.0;
  /// Stop once neither center moves by more than this.
  double tolerance = 1e-6;
  int max_iterations = 300;
  /// Only used to separate coinciding initial centers.
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two-class fuzzy c-means result. Index 0 is the lower-center
/// ("unchanged") cluster, index 1 the higher-center ("changed") one.
struct FcmResult {
  std::vector<std::array<double, 2>> memberships;
  std::array<double, 2> centers{};
  std::vector<std::uint8_t> labels;
  int iterations = 0;
  bool converged = false;
  /// Objective after each iteration.
  std::vector<double> objective;
};

/// scores[i] = -log10(pdfs[i]). Throws DataError on non-positive input.
std::vector<double> negative_log_scores(std::span<const double> pdfs);

/// Sum_i Sum_k u_ik^m (x_i - c_k)^2.
double fcm_objective(std::span<const double> scores, std::span<const std::array<double, 2>> memberships,
                     const std::array<double, 2>& centers, double fuzzifier);

/// Throws DataError("degenerate scores") when fewer than two distinct
/// finite values are present.
FcmResult fcm_two_class(std::span<const double> scores, const FcmOptions& options = {});

/// Paints each superpixel's label onto its pixels.
ChangeMap labels_to_mask(const SuperpixelMap& map, std::span<const std::uint8_t> labels);

}  // namespace copulacd
