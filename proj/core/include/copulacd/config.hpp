#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "copulacd/classical_copulas.hpp"
#include "copulacd/clustering.hpp"
#include "copulacd/marginals.hpp"
#include "copulacd/neural_copula.hpp"
#include "copulacd/segmentation.hpp"
#include "copulacd/synthgen.hpp"
#include "copulacd/training.hpp"

namespace copulacd {

/// Density source used at inference time.
enum class Backend { neural, gaussian, student_t, clayton, frank };

std::string to_string(Backend b);
Backend parse_backend(const std::string& name);

struct PipelineConfig {
  struct Paths {
    std::filesystem::path pre;
    std::filesystem::path post;
    std::optional<std::filesystem::path> truth;
    std::filesystem::path output_dir = "out";
  } paths;

  int n1 = 6000;  ///< superpixels for training
  int n7 = 3000;  ///< superpixels for inference
  double compactness = 10.0;
  SlicOptions slic;
  std::optional<TrainingRegion> training_region;

  std::vector<int> layer_sizes = default_layer_sizes();
  Activation hidden_activation = Activation::tanh;
  OutputActivation output_activation = OutputActivation::scaled_sigmoid;
  double output_margin = 0.02;
  TrainConfig train;

  KdeOptions kde;
  FcmOptions fcm;
  Backend backend = Backend::neural;
  std::uint64_t seed = 0;

  /// Scene description for the synth subcommand; its seed follows `seed`
  /// unless [synth] sets one.
  SynthSpec synth;

  /// Range checks that do not need the images.
  void validate() const;
};

/// Parses the INI text. Relative paths are resolved against `base_dir`.
/// Unknown sections or keys are rejected with UsageError.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file; relative paths resolve against its directory.
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical INI rendering. parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const PipelineConfig& config);

/// "gaussian(0.85)", "student_t(0.7,4)", "clayton(2)" or "frank(5)".
CopulaFamily parse_copula(const std::string& text);
std::string copula_to_text(const CopulaFamily& fam);

}  // namespace copulacd
