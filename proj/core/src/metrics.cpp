#include "copulacd/metrics.hpp"

#include <json.hpp>

#include "copulacd/error.hpp"

namespace copulacd {

ConfusionCounts confusion(const ChangeMap& pred, const ChangeMap& truth) {
  pred.validate();
  truth.validate();
  if (pred.width != truth.width || pred.height != truth.height) {
    throw DataError("prediction and truth masks differ in size");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const bool p = pred.labels[i] != 0;
    const bool t = truth.labels[i] != 0;
    if (p && t) {
      ++c.tp;
    } else if (!p && !t) {
      ++c.tn;
    } else if (p) {
      ++c.fp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

MetricsReport compute_metrics(const ConfusionCounts& c) {
  const std::uint64_t total = c.total();
  if (total == 0) throw DataError("metrics need at least one evaluated pixel");
  MetricsReport r;
  r.counts = c;
  r.oe = c.fp + c.fn;
  const double t = static_cast<double>(total);
  r.pcc = static_cast<double>(c.tp + c.tn) / t;
  const std::uint64_t pos_truth = c.tp + c.fn;
  const std::uint64_t pos_pred = c.tp + c.fp;
  const std::uint64_t neg_truth = c.tn + c.fp;
  const std::uint64_t neg_pred = c.tn + c.fn;
  r.pre = (static_cast<double>(pos_truth) * static_cast<double>(pos_pred) +
           static_cast<double>(neg_truth) * static_cast<double>(neg_pred)) /
          (t * t);
  // Chance agreement is exactly 1 only when truth and prediction are the
  // same single class.
  const bool degenerate = (pos_truth == total && pos_pred == total) || (neg_truth == total && neg_pred == total);
  if (degenerate) {
    r.pre = 1.0;
    r.kc = r.pcc == 1.0 ? 1.0 : 0.0;
    r.warnings.emplace_back("kappa undefined: chance agreement is 1 (single-class truth and prediction)");
  } else {
    r.kc = (r.pcc - r.pre) / (1.0 - r.pre);
  }
  return r;
}

std::string to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["tp"] = report.counts.tp;
  j["tn"] = report.counts.tn;
  j["fp"] = report.counts.fp;
  j["fn"] = report.counts.fn;
  j["oe"] = report.oe;
  j["pcc"] = report.pcc;
  j["kc"] = report.kc;
  j["warnings"] = report.warnings;
  return j.dump(2);
}

MetricsReport metrics_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ConfusionCounts c;
    c.tp = j.at("tp").get<std::uint64_t>();
    c.tn = j.at("tn").get<std::uint64_t>();
    c.fp = j.at("fp").get<std::uint64_t>();
    c.fn = j.at("fn").get<std::uint64_t>();
    MetricsReport r = compute_metrics(c);
    r.oe = j.at("oe").get<std::uint64_t>();
    r.pcc = j.at("pcc").get<double>();
    r.kc = j.at("kc").get<double>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics report: ") + e.what());
  }
}

}  // namespace copulacd
