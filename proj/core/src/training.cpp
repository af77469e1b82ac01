#include "copulacd/training.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "copulacd/error.hpp"

namespace copulacd {

namespace {

// NAdam with constant momentum: the update uses the bias-corrected
// look-ahead blend of the new first moment and the current gradient.
class Nadam {
 public:
  Nadam(std::size_t n, const TrainConfig& c) : cfg_(c), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad) {
    ++t_;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double b1t = std::pow(b1, static_cast<double>(t_));
    const double b1t_next = b1t * b1;
    const double b2t = std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grad[i];
      m_[i] = b1 * m_[i] + (1.0 - b1) * g;
      v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
      const double m_hat = b1 * m_[i] / (1.0 - b1t_next) + (1.0 - b1) * g / (1.0 - b1t);
      const double v_hat = v_[i] / (1.0 - b2t);
      params[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }

 private:
  const TrainConfig& cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("learning rate must be positive");
  if (epochs < 0) throw UsageError("epochs must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw UsageError("betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
  loss.validate();
}

TrainResult train(CopulaNet net, const TrainingSet& data, const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  net.validate();
  TrainResult result;
  result.net = net;
  if (config.epochs == 0) return result;

  const LossEngine engine(config.loss, data);
  Nadam opt(net.params.size(), config);
  std::vector<double> grad;
  result.history.reserve(static_cast<std::size_t>(config.epochs));

  for (long epoch = 0; epoch < config.epochs; ++epoch) {
    LossBreakdown loss;
    try {
      loss = engine.evaluate(net, grad);
    } catch (const NumericalError& e) {
      throw DivergenceError(std::string("training diverged at epoch ") + std::to_string(epoch) + ": " + e.what(),
                            epoch);
    }
    if (!std::isfinite(loss.total)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ": non-finite total loss", epoch);
    }
    result.history.push_back(loss);
    if (result.best_epoch < 0 || loss.total < result.best_loss) {
      result.best_epoch = epoch;
      result.best_loss = loss.total;
      result.net.params = net.params;
    }
    if (on_epoch) on_epoch(epoch, loss);
    opt.step(net.params, grad);
  }
  return result;
}

void write_loss_history_csv(const std::vector<LossBreakdown>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "epoch,boundary,integration,nonneg,ml,observation,total\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    const auto& h = history[e];
    out << e << ',' << fmt(h.boundary) << ',' << fmt(h.integration) << ',' << fmt(h.nonneg) << ',' << fmt(h.ml) << ','
        << fmt(h.observation) << ',' << fmt(h.total) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace copulacd
