#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "copulacd/checkpoint.hpp"
#include "copulacd/clustering.hpp"
#include "copulacd/config.hpp"
#include "copulacd/metrics.hpp"
#include "copulacd/raster_io.hpp"
#include "copulacd/segmentation.hpp"
#include "copulacd/synthgen.hpp"
#include "copulacd/training.hpp"

namespace copulacd {

/// Maps pseudo-observation pairs to copula densities.
using DensityFn = std::function<std::vector<double>(std::span<const double> u, std::span<const double> v)>;

/// pdf = ReLU(d2C/dudv) + rho of the network.
DensityFn neural_density(const CopulaNet& net, double rho);

/// Closed-form density plus rho, so it shares the neural floor; arguments
/// are clamped into [kCdfFloor, 1 - kCdfFloor] because the elliptical and
/// Clayton densities are singular on the boundary.
DensityFn classical_density(const CopulaFamily& fam, double rho);

/// Fits a classical family on the checkpoint's training features, mapped
/// through the checkpoint's tables and clamped like classical_density.
CopulaFamily fit_classical(Family family, const Checkpoint& ckpt);

struct TrainedModel {
  SuperpixelMap segmentation;
  std::vector<std::int32_t> training_ids;
  TrainResult result;
  Checkpoint checkpoint;
};

/// Segments with n1 superpixels, selects the training superpixels, fits the
/// marginal tables and trains the network.
TrainedModel train_model(const BiTemporalPair& pair, const PipelineConfig& config,
                         const EpochCallback& on_epoch = {});

struct Detection {
  SuperpixelMap segmentation;
  std::vector<std::uint8_t> z1;
  std::vector<std::uint8_t> z2;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> pdf;
  std::vector<double> score;
  FcmResult fcm;
  ChangeMap mask;
  /// Human-readable density source, e.g. "neural" or "gaussian(rho=0.8)".
  std::string density;
  std::optional<CopulaFamily> fitted;
};

/// Segments with n7 superpixels (or reuses `segmentation`), extracts
/// features, maps them through the checkpoint's tables, scores them with
/// `density` and clusters the scores.
Detection detect_changes(const BiTemporalPair& pair, const Checkpoint& ckpt, const DensityFn& density,
                         const PipelineConfig& config, const SuperpixelMap* segmentation = nullptr);

/// As above with the density chosen by config.backend.
Detection detect_changes(const BiTemporalPair& pair, const Checkpoint& ckpt, const PipelineConfig& config,
                         const SuperpixelMap* segmentation = nullptr);

/// Loads both images as single-band intensity rasters.
BiTemporalPair load_pair(const PipelineConfig& config);

/// Superpixel id, u, v, pdf, score, label per row.
void write_scores_csv(const Detection& det, const std::filesystem::path& path);

// Subcommands. Each writes its artifacts under `out_dir` and returns them.

struct SynthArtifacts {
  std::filesystem::path pre;
  std::filesystem::path post;
  std::filesystem::path truth;
};
SynthArtifacts cmd_synth(const PipelineConfig& config, const std::filesystem::path& out_dir);

struct TrainArtifacts {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
  TrainedModel model;
};
TrainArtifacts cmd_train(const PipelineConfig& config, const std::filesystem::path& out_dir,
                         const EpochCallback& on_epoch = {});

struct InferArtifacts {
  std::filesystem::path mask;
  std::filesystem::path scores_csv;
  Detection detection;
};
InferArtifacts cmd_infer(const PipelineConfig& config, const std::filesystem::path& checkpoint,
                         const std::filesystem::path& out_dir);

/// Writes metrics.json. `extra` entries are added as string fields.
MetricsReport cmd_eval(const std::filesystem::path& pred, const std::filesystem::path& truth,
                       const std::filesystem::path& report,
                       const std::vector<std::pair<std::string, std::string>>& extra = {});

struct RunArtifacts {
  TrainArtifacts train;
  InferArtifacts infer;
  std::optional<MetricsReport> metrics;
  std::optional<std::filesystem::path> metrics_json;
};
/// train, then infer (reusing the training segmentation when n1 == n7),
/// then eval when a truth mask is configured.
RunArtifacts cmd_run(const PipelineConfig& config, const std::filesystem::path& out_dir,
                     const EpochCallback& on_epoch = {});

}  // namespace copulacd
