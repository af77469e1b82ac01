#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copulacd/raster_io.hpp"

namespace copulacd {

/// Confusion counts with "changed" as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricsReport {
  ConfusionCounts counts;
  /// Overall error, fp + fn.
  std::uint64_t oe = 0;
  /// Percentage correct classification as a fraction.
  double pcc = 0.0;
  /// Chance agreement.
  double pre = 0.0;
  /// Kappa coefficient.
  double kc = 0.0;
  std::vector<std::string> warnings;
};

/// Throws DataError on dimension mismatch.
ConfusionCounts confusion(const ChangeMap& pred, const ChangeMap& truth);

/// Throws DataError when the counts are all zero. When the chance agreement
/// is exactly 1, kc is 1 if pcc == 1 and 0 otherwise, and a warning is added.
MetricsReport compute_metrics(const ConfusionCounts& c);

/// JSON object with keys tp, tn, fp, fn, oe, pcc, kc, warnings.
std::string to_json(const MetricsReport& report);

/// Parses the output of to_json. Throws DataError on malformed input.
MetricsReport metrics_from_json(const std::string& text);

}  // namespace copulacd
