#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "copulacd/copula_losses.hpp"
#include "copulacd/neural_copula.hpp"

namespace copulacd {

struct TrainConfig {
  double learning_rate = 0.001;
  long epochs = 25000;
  std::uint64_t seed = 0;
  LossSettings loss;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainResult {
  /// Parameters at the epoch with the lowest recorded total loss.
  CopulaNet net;
  std::vector<LossBreakdown> history;
  long best_epoch = -1;
  double best_loss = 0.0;
};

/// Called after every epoch with (epoch, loss at that epoch's parameters).
using EpochCallback = std::function<void(long, const LossBreakdown&)>;

/// Full-batch NAdam on the total copula loss. history[e] is the loss of the
/// parameters before update e. Throws DivergenceError on a non-finite loss.
TrainResult train(CopulaNet net, const TrainingSet& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// CSV with header "epoch,boundary,integration,nonneg,ml,observation,total".
void write_loss_history_csv(const std::vector<LossBreakdown>& history, const std::filesystem::path& path);

}  // namespace copulacd
