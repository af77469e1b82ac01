// copula-cd: command line front end for the copula change-detection pipeline.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "copulacd/error.hpp"
#include "copulacd/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

int exit_code(copulacd::ErrorKind kind) {
  switch (kind) {
    case copulacd::ErrorKind::usage: return kExitUsage;
    case copulacd::ErrorKind::data: return kExitData;
    case copulacd::ErrorKind::numerical: return kExitNumerical;
  }
  return kExitData;
}

copulacd::EpochCallback progress(long epochs, bool quiet) {
  if (quiet) return {};
  const long every = std::max(1L, epochs / 20);
  return [every, epochs](long epoch, const copulacd::LossBreakdown& loss) {
    if (epoch % every == 0 || epoch + 1 == epochs) {
      std::fprintf(stderr, "epoch %ld/%ld  total %.6g  (boundary %.4g, integration %.4g, nonneg %.4g, ml %.4g, obs %.4g)\n",
                   epoch, epochs, loss.total, loss.boundary, loss.integration, loss.nonneg, loss.ml, loss.observation);
    }
  };
}

void print_metrics(const copulacd::MetricsReport& r) {
  std::printf("tp %llu  tn %llu  fp %llu  fn %llu  oe %llu  pcc %.6f  kc %.6f\n",
              static_cast<unsigned long long>(r.counts.tp), static_cast<unsigned long long>(r.counts.tn),
              static_cast<unsigned long long>(r.counts.fp), static_cast<unsigned long long>(r.counts.fn),
              static_cast<unsigned long long>(r.oe), r.pcc, r.kc);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised heterogeneous change detection with a neural copula"};
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint;
  std::string out_dir;
  std::string pred;
  std::string truth;
  bool quiet = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "Output directory (default: [paths] output_dir)");
  };
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic bi-temporal scene with ground truth");
  CLI::App* train = app.add_subcommand("train", "Segment, select training superpixels and train the copula");
  CLI::App* infer = app.add_subcommand("infer", "Score superpixels with a trained checkpoint and write the mask");
  CLI::App* eval = app.add_subcommand("eval", "Compare a predicted mask with the truth mask");
  CLI::App* run = app.add_subcommand("run", "train, infer and (with a truth mask) eval in one go");
  for (CLI::App* cmd : {synth, train, infer, eval, run}) add_common(cmd);
  for (CLI::App* cmd : {train, run}) cmd->add_flag("--quiet", quiet, "No per-epoch progress");
  infer->add_option("--checkpoint", checkpoint, "Checkpoint (default: <out>/model.ckpt)");
  eval->add_option("--pred", pred, "Predicted mask (default: <out>/change_mask.pgm)");
  eval->add_option("--truth", truth, "Truth mask (default: [paths] truth)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    const copulacd::PipelineConfig config = copulacd::load_config(config_path);
    const std::filesystem::path out = out_dir.empty() ? config.paths.output_dir : std::filesystem::path(out_dir);

    if (synth->parsed()) {
      const auto a = copulacd::cmd_synth(config, out);
      std::printf("wrote %s, %s, %s\n", a.pre.c_str(), a.post.c_str(), a.truth.c_str());
    } else if (train->parsed()) {
      const auto a = copulacd::cmd_train(config, out, progress(config.train.epochs, quiet));
      std::printf("best epoch %ld, loss %.6g\nwrote %s, %s\n", a.model.result.best_epoch, a.model.result.best_loss,
                  a.checkpoint.c_str(), a.loss_csv.c_str());
    } else if (infer->parsed()) {
      const std::filesystem::path ckpt = checkpoint.empty() ? out / "model.ckpt" : std::filesystem::path(checkpoint);
      const auto a = copulacd::cmd_infer(config, ckpt, out);
      std::printf("density %s, %zu superpixels, %zu changed pixels\nwrote %s, %s\n", a.detection.density.c_str(),
                  a.detection.u.size(), a.detection.mask.changed_count(), a.mask.c_str(), a.scores_csv.c_str());
    } else if (eval->parsed()) {
      const std::filesystem::path p = pred.empty() ? out / "change_mask.pgm" : std::filesystem::path(pred);
      std::optional<std::filesystem::path> t = config.paths.truth;
      if (!truth.empty()) t = truth;
      if (!t) throw copulacd::UsageError("eval needs --truth or [paths] truth");
      const auto report = out / "metrics.json";
      print_metrics(copulacd::cmd_eval(p, *t, report, {{"backend", copulacd::to_string(config.backend)}}));
      std::printf("wrote %s\n", report.c_str());
    } else if (run->parsed()) {
      const auto a = copulacd::cmd_run(config, out, progress(config.train.epochs, quiet));
      std::printf("density %s, %zu superpixels, %zu changed pixels\n", a.infer.detection.density.c_str(),
                  a.infer.detection.u.size(), a.infer.detection.mask.changed_count());
      if (a.metrics) print_metrics(*a.metrics);
      std::printf("wrote outputs to %s\n", out.c_str());
    }
  } catch (const copulacd::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}
