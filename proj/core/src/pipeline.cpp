#include "copulacd/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "copulacd/error.hpp"
#include "copulacd/marginals.hpp"
#include "copulacd/neural_copula.hpp"

namespace copulacd {

namespace {

double clamp_open(double p) { return std::clamp(p, kCdfFloor, 1.0 - kCdfFloor); }

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

BiTemporalPair intensity_pair(const BiTemporalPair& pair) {
  if (pair.pre().bands == 1 && pair.post().bands == 1) return pair;
  return BiTemporalPair(to_intensity(pair.pre()), to_intensity(pair.post()));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

DensityFn neural_density(const CopulaNet& net, double rho) {
  return [net, rho](std::span<const double> u, std::span<const double> v) {
    const auto evals = forward_with_derivs(net, u, v, rho);
    std::vector<double> out(evals.size());
    std::transform(evals.begin(), evals.end(), out.begin(), [](const CopulaEval& e) { return e.pdf; });
    return out;
  };
}

DensityFn classical_density(const CopulaFamily& fam, double rho) {
  fam.validate();
  return [fam, rho](std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw UsageError("density inputs differ in length");
    std::vector<double> out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = pdf(fam, clamp_open(u[i]), clamp_open(v[i])) + rho;
    return out;
  };
}

CopulaFamily fit_classical(Family family, const Checkpoint& ckpt) {
  std::vector<double> u = pit(ckpt.g1, ckpt.table1);
  std::vector<double> v = pit(ckpt.g2, ckpt.table2);
  std::transform(u.begin(), u.end(), u.begin(), clamp_open);
  std::transform(v.begin(), v.end(), v.begin(), clamp_open);
  return fit(family, u, v);
}

TrainedModel train_model(const BiTemporalPair& input, const PipelineConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (!config.training_region) throw UsageError("training needs a [training_region]");
  const BiTemporalPair pair = intensity_pair(input);
  config.training_region->validate(pair.width(), pair.height());

  TrainedModel m;
  m.segmentation = co_slic(pair, config.n1, config.compactness, config.seed, config.slic);
  m.training_ids = select_training_superpixels(m.segmentation, *config.training_region);
  const FeatureSet f1 = extract_features(pair.pre(), m.segmentation, std::span<const std::int32_t>(m.training_ids));
  const FeatureSet f2 = extract_features(pair.post(), m.segmentation, std::span<const std::int32_t>(m.training_ids));
  const TrainingSet data = make_training_set(f1.values, f2.values, config.kde);

  CopulaNet net = init_net(config.layer_sizes, config.seed, config.hidden_activation, config.output_activation);
  net.output_margin = config.output_margin;
  m.result = train(std::move(net), data, config.train, on_epoch);
  m.checkpoint = Checkpoint{m.result.net, data.table1, data.table2, data.g1, data.g2, to_config_text(config)};
  return m;
}

Detection detect_changes(const BiTemporalPair& input, const Checkpoint& ckpt, const DensityFn& density,
                         const PipelineConfig& config, const SuperpixelMap* segmentation) {
  config.validate();
  const BiTemporalPair pair = intensity_pair(input);
  Detection d;
  if (segmentation) {
    if (segmentation->width != pair.width() || segmentation->height != pair.height()) {
      throw DataError("segmentation and images differ in size");
    }
    d.segmentation = *segmentation;
  } else {
    d.segmentation = co_slic(pair, config.n7, config.compactness, config.seed, config.slic);
  }
  d.z1 = extract_features(pair.pre(), d.segmentation).values;
  d.z2 = extract_features(pair.post(), d.segmentation).values;
  d.u = pit(d.z1, ckpt.table1);
  d.v = pit(d.z2, ckpt.table2);
  d.pdf = density(d.u, d.v);
  if (d.pdf.size() != d.u.size()) throw UsageError("density source returned the wrong number of values");
  d.score = negative_log_scores(d.pdf);
  d.fcm = fcm_two_class(d.score, config.fcm);
  d.mask = labels_to_mask(d.segmentation, d.fcm.labels);
  return d;
}

Detection detect_changes(const BiTemporalPair& pair, const Checkpoint& ckpt, const PipelineConfig& config,
                         const SuperpixelMap* segmentation) {
  if (config.backend == Backend::neural) {
    Detection d = detect_changes(pair, ckpt, neural_density(ckpt.net, config.train.loss.rho), config, segmentation);
    d.density = "neural";
    return d;
  }
  const Family family = parse_family(to_string(config.backend));
  const CopulaFamily fam = fit_classical(family, ckpt);
  Detection d = detect_changes(pair, ckpt, classical_density(fam, config.train.loss.rho), config, segmentation);
  d.density = fam.describe();
  d.fitted = fam;
  return d;
}

BiTemporalPair load_pair(const PipelineConfig& config) {
  if (config.paths.pre.empty() || config.paths.post.empty()) {
    throw UsageError("config needs [paths] pre and post");
  }
  return BiTemporalPair(to_intensity(load_raster(config.paths.pre)), to_intensity(load_raster(config.paths.post)));
}

void write_scores_csv(const Detection& det, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "id,u,v,pdf,score,label\n";
  for (std::size_t i = 0; i < det.u.size(); ++i) {
    out << i << ',' << fmt(det.u[i]) << ',' << fmt(det.v[i]) << ',' << fmt(det.pdf[i]) << ',' << fmt(det.score[i])
        << ',' << static_cast<int>(det.fcm.labels[i]) << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

SynthArtifacts cmd_synth(const PipelineConfig& config, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const SynthScene scene = generate(config.synth);
  SynthArtifacts a{out_dir / "pre.pgm", out_dir / "post.pgm", out_dir / "truth.pgm"};
  save_raster(scene.pair.pre(), a.pre);
  save_raster(scene.pair.post(), a.post);
  save_change_map(scene.truth, a.truth);
  return a;
}

TrainArtifacts cmd_train(const PipelineConfig& config, const std::filesystem::path& out_dir,
                         const EpochCallback& on_epoch) {
  const BiTemporalPair pair = load_pair(config);
  ensure_dir(out_dir);
  TrainArtifacts a{out_dir / "model.ckpt", out_dir / "loss_history.csv", train_model(pair, config, on_epoch)};
  save_checkpoint(a.model.checkpoint, a.checkpoint);
  write_loss_history_csv(a.model.result.history, a.loss_csv);
  return a;
}

InferArtifacts cmd_infer(const PipelineConfig& config, const std::filesystem::path& checkpoint,
                         const std::filesystem::path& out_dir) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const BiTemporalPair pair = load_pair(config);
  ensure_dir(out_dir);
  InferArtifacts a{out_dir / "change_mask.pgm", out_dir / "scores.csv", detect_changes(pair, ckpt, config)};
  save_change_map(a.detection.mask, a.mask);
  write_scores_csv(a.detection, a.scores_csv);
  return a;
}

MetricsReport cmd_eval(const std::filesystem::path& pred, const std::filesystem::path& truth,
                       const std::filesystem::path& report,
                       const std::vector<std::pair<std::string, std::string>>& extra) {
  const MetricsReport r = compute_metrics(confusion(load_change_map(pred), load_change_map(truth)));
  auto j = nlohmann::ordered_json::parse(to_json(r));
  for (const auto& [key, value] : extra) j[key] = value;
  if (report.has_parent_path()) ensure_dir(report.parent_path());
  write_text(report, j.dump(2) + "\n");
  return r;
}

RunArtifacts cmd_run(const PipelineConfig& config, const std::filesystem::path& out_dir,
                     const EpochCallback& on_epoch) {
  const BiTemporalPair pair = load_pair(config);
  ensure_dir(out_dir);
  RunArtifacts a;
  a.train = TrainArtifacts{out_dir / "model.ckpt", out_dir / "loss_history.csv", train_model(pair, config, on_epoch)};
  save_checkpoint(a.train.model.checkpoint, a.train.checkpoint);
  write_loss_history_csv(a.train.model.result.history, a.train.loss_csv);

  const SuperpixelMap* reuse = config.n1 == config.n7 ? &a.train.model.segmentation : nullptr;
  a.infer = InferArtifacts{out_dir / "change_mask.pgm", out_dir / "scores.csv",
                           detect_changes(pair, a.train.model.checkpoint, config, reuse)};
  save_change_map(a.infer.detection.mask, a.infer.mask);
  write_scores_csv(a.infer.detection, a.infer.scores_csv);

  if (config.paths.truth) {
    a.metrics_json = out_dir / "metrics.json";
    a.metrics = cmd_eval(a.infer.mask, *config.paths.truth, *a.metrics_json,
                         {{"backend", to_string(config.backend)}, {"density", a.infer.detection.density}});
  }
  return a;
}

}  // namespace copulacd
